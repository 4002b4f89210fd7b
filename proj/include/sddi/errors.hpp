// SPDX-FileCopyrightText: Copyright (c) 2026 The sddi authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sddi {

//! Incompatible tensor shapes or an architecture whose shape chain collapses.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Invalid run configuration or model spec.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Unreadable or malformed input data (images, CSV files, downloads).
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Malformed or incompatible checkpoint file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! NaN/Inf encountered during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Remote fetch failure that survived retries.
class FetchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sddi
