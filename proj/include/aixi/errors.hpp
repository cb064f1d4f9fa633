// Copyright 2026 The aixi-lab Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace aixi {

// Base of every error thrown by the library. Each failure mode has its own
// subclass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AIXI_DEFINE_ERROR(Name)                     \
  class Name : public Error {                       \
   public:                                          \
    explicit Name(const std::string& what)          \
        : Error(std::string(#Name ": ") + what) {}  \
  };

AIXI_DEFINE_ERROR(AlphabetMismatch)
AIXI_DEFINE_ERROR(IndexError)
AIXI_DEFINE_ERROR(ShapeError)
AIXI_DEFINE_ERROR(RangeError)
AIXI_DEFINE_ERROR(UnreachableHistory)
AIXI_DEFINE_ERROR(ModelInvalid)
AIXI_DEFINE_ERROR(NormalizationError)
AIXI_DEFINE_ERROR(DiscretizationError)
AIXI_DEFINE_ERROR(EmptyClass)
AIXI_DEFINE_ERROR(ClassExhausted)
AIXI_DEFINE_ERROR(DegenerateLoss)
AIXI_DEFINE_ERROR(InstanceTooLarge)
AIXI_DEFINE_ERROR(NotApplicable)
AIXI_DEFINE_ERROR(ConfigError)

#undef AIXI_DEFINE_ERROR

}  // namespace aixi
