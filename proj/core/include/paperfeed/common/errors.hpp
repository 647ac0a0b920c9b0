#pragma once

#include <stdexcept>
#include <string>

namespace paperfeed {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad JSON, bad timestamp, bad config line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The storage backend could not complete an operation. Callers decide
/// whether to retry.
class StoreUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace paperfeed
