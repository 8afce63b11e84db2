// Copyright 2026 The nclbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ncl {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, spec, or argument combination. Maps to CLI exit 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent data (files, datasets, label sets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or degenerate numerics (zero-norm embeddings, NaN losses).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncl
