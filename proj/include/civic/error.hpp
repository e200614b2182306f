// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace civic {

enum class ErrorCode {
  // draft / request validation
  EmptyCategories,
  BadCoordinates,
  TextTooLong,
  BadClientKey,
  BadAttachment,
  UnknownCategory,
  BadRequest,
  BadBBox,
  BadCellSize,
  BadPage,
  BadPeriod,
  BatchTooLarge,
  WeakCredential,
  // auth
  Unauthorized,
  NotAdmin,
  // state
  UnknownReport,
  NameTaken,
  SelfRating,
  ReportRejected,
  NotPending,
  RateLimited,
  // storage
  StorageFailure,
  CorruptLog,
};

std::string_view error_code_name(ErrorCode code);
ErrorCode error_code_from_name(std::string_view name);  // BadRequest if unknown
int http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace civic
