// Copyright 2026 The cdnes Authors. All Rights Reserved.
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
// =============================================================================

#ifndef CDNES_ERRORS_H_
#define CDNES_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cdnes {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed config, inconsistent dimensions, violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Iterates left the finite range during a run.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long long iteration)
      : Error(what), iteration_(iteration) {}
  long long iteration() const { return iteration_; }

 private:
  long long iteration_;
};

// The rate certificate could not be established.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdnes

#endif  // CDNES_ERRORS_H_
