#pragma once

#include <string>
#include <vector>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::rec {

/// The directory service could not answer (timeout, network error, or a
/// scripted failure in tests).
class FollowsUnavailable : public Error {
 public:
  using Error::Error;
};

/// Source of a user's follow list: the live platform API or a harness table.
class FollowsClient {
 public:
  virtual ~FollowsClient() = default;

  /// Accounts `user_id` follows. Throws FollowsUnavailable.
  virtual std::vector<std::string> get_follows(const std::string& user_id) = 0;
};

}  // namespace paperfeed::rec
