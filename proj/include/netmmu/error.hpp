/*
 * Copyright 2026 The netmmu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NETMMU_ERROR_HPP_
#define NETMMU_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace netmmu {

enum class ErrKind {
  kAlignment,         // size/base violates page or power-of-two discipline
  kOutOfMemory,       // no blade has a fitting aligned hole
  kInvalidFree,       // free of a range that is not a live allocation
  kTranslationFault,  // address outside registered space
  kCapacity,          // switch rule/slot budget exhausted
  kEncoding,          // range cannot be encoded under the entry policy
  kConfig,            // bad configuration key/value
  kTrace,             // malformed trace input
  kInternal,          // broken invariant; always a bug
};

class SimError : public std::runtime_error {
 public:
  SimError(ErrKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

}  // namespace netmmu

#endif  // NETMMU_ERROR_HPP_
