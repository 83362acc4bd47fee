// Copyright 2026 The nullspace-unlearn Authors
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

#ifndef UNSC_ERRORS_HPP_
#define UNSC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace unsc {

// Precondition or configuration violation (bad shapes, bad labels, bad
// epsilons, inconsistent plans).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents. The message carries the byte or line offset.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced or received a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required input file does not exist or cannot be opened.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace unsc

#endif  // UNSC_ERRORS_HPP_
