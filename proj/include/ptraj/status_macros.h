// Copyright 2026 The ptraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PTRAJ_STATUS_MACROS_H_
#define PTRAJ_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define PTRAJ_RETURN_IF_ERROR(expr)            \
  do {                                         \
    const absl::Status ptraj_status_ = (expr); \
    if (!ptraj_status_.ok()) {                 \
      return ptraj_status_;                    \
    }                                          \
  } while (0)

#define PTRAJ_CONCAT_INNER_(a, b) a##b
#define PTRAJ_CONCAT_(a, b) PTRAJ_CONCAT_INNER_(a, b)

#define PTRAJ_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                  \
  if (!statusor.ok()) {                                     \
    return statusor.status();                               \
  }                                                         \
  lhs = std::move(statusor).value()

#define PTRAJ_ASSIGN_OR_RETURN(lhs, rexpr) \
  PTRAJ_ASSIGN_OR_RETURN_IMPL_(            \
      PTRAJ_CONCAT_(ptraj_statusor_, __LINE__), lhs, rexpr)

#endif  // PTRAJ_STATUS_MACROS_H_
