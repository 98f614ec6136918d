// Copyright 2026 the igboltz authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IGB_ERRORS_HPP
#define IGB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace igb {

/// Base class of all exceptions raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration input.
struct ConfigError : Error {
  using Error::Error;
};

/// A function was evaluated outside its numeric domain (NaN/Inf at a node,
/// degenerate geometry, positivity failure).
struct EvalError : Error {
  using Error::Error;
};

/// A requested computation exceeds a configured resource bound.
struct ResourceError : Error {
  using Error::Error;
};

/// An iteration or solver failed to meet its contract.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace igb

#endif  // IGB_ERRORS_HPP
