// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/error.hpp"

#include <array>
#include <utility>

namespace civic {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 23> kNames{{
    {ErrorCode::EmptyCategories, "EmptyCategories"},
    {ErrorCode::BadCoordinates, "BadCoordinates"},
    {ErrorCode::TextTooLong, "TextTooLong"},
    {ErrorCode::BadClientKey, "BadClientKey"},
    {ErrorCode::BadAttachment, "BadAttachment"},
    {ErrorCode::UnknownCategory, "UnknownCategory"},
    {ErrorCode::BadRequest, "BadRequest"},
    {ErrorCode::BadBBox, "BadBBox"},
    {ErrorCode::BadCellSize, "BadCellSize"},
    {ErrorCode::BadPage, "BadPage"},
    {ErrorCode::BadPeriod, "BadPeriod"},
    {ErrorCode::BatchTooLarge, "BatchTooLarge"},
    {ErrorCode::WeakCredential, "WeakCredential"},
    {ErrorCode::Unauthorized, "Unauthorized"},
    {ErrorCode::NotAdmin, "NotAdmin"},
    {ErrorCode::UnknownReport, "UnknownReport"},
    {ErrorCode::NameTaken, "NameTaken"},
    {ErrorCode::SelfRating, "SelfRating"},
    {ErrorCode::ReportRejected, "ReportRejected"},
    {ErrorCode::NotPending, "NotPending"},
    {ErrorCode::RateLimited, "RateLimited"},
    {ErrorCode::StorageFailure, "StorageFailure"},
    {ErrorCode::CorruptLog, "CorruptLog"},
}};

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "BadRequest";
}

ErrorCode error_code_from_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::BadRequest;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unauthorized:
      return 401;
    case ErrorCode::NotAdmin:
      return 403;
    case ErrorCode::UnknownReport:
      return 404;
    case ErrorCode::NameTaken:
    case ErrorCode::SelfRating:
    case ErrorCode::ReportRejected:
    case ErrorCode::NotPending:
      return 409;
    case ErrorCode::RateLimited:
      return 429;
    case ErrorCode::StorageFailure:
    case ErrorCode::CorruptLog:
      return 500;
    default:
      return 400;
  }
}

}  // namespace civic
