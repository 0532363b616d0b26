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

#include "turnover/error.h"

#include <string>
#include <utility>

namespace turnover {
namespace {

std::string Decorate(const std::string& message, std::size_t row,
                     const std::string& column) {
  std::string out;
  if (row > 0) out += "row " + std::to_string(row);
  if (!column.empty()) {
    if (!out.empty()) out += ", ";
    out += "column \"" + column + "\"";
  }
  if (out.empty()) return message;
  return out + ": " + message;
}

}  // namespace

DataError::DataError(const std::string& message, std::size_t row,
                     std::string column)
    : Error(Decorate(message, row, column)),
      row_(row),
      column_(std::move(column)) {}

}  // namespace turnover
