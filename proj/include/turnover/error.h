/*
 * Copyright 2026 The Turnover Analytics Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TURNOVER_ERROR_H_
#define TURNOVER_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace turnover {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input data. `row` is 1-based over data rows (0 when the error is
// not tied to a row); `column` is empty when not tied to a column.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::size_t row = 0,
            std::string column = {});

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Invalid parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model was applied to data whose selected features, kinds or levels
// differ from the ones it was trained on.
class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

// The pooled covariance of a discriminant model is not invertible.
class SingularCovariance : public Error {
 public:
  using Error::Error;
};

}  // namespace turnover

#endif  // TURNOVER_ERROR_H_
