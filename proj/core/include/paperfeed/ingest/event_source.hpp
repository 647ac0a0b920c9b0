#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "paperfeed/common/errors.hpp"
#include "paperfeed/ingest/event.hpp"

namespace paperfeed::ingest {

/// Thrown by an EventSource when its connection drops mid-stream.
class StreamDisconnected : public Error {
 public:
  using Error::Error;
};

/// Seam between the ingest loop and a concrete event feed (a replay file,
/// a scripted test stream, or a live-network decoder).
class EventSource {
 public:
  virtual ~EventSource() = default;

  /// Next event in seq order, or nullopt when the stream has closed.
  /// Throws StreamDisconnected on connection loss.
  virtual std::optional<EventEnvelope> next() = 0;

  /// Re-establishes the stream so that it resumes after `last_seq`.
  /// Sources may redeliver earlier events; the reader filters them.
  /// Throws StreamDisconnected when the attempt fails.
  virtual void reconnect(std::uint64_t last_seq) = 0;
};

/// Reads the canonical JSON-lines event format from a file.
class JsonlFileSource : public EventSource {
 public:
  explicit JsonlFileSource(std::filesystem::path path);

  std::optional<EventEnvelope> next() override;
  void reconnect(std::uint64_t last_seq) override;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

/// In-memory stream that can be told to disconnect after given sequence
/// numbers. Reconnecting restarts delivery from the first event with
/// seq > last_seq (minus `replay_overlap` earlier events, to exercise the
/// reader's duplicate filter).
class VectorSource : public EventSource {
 public:
  explicit VectorSource(std::vector<EventEnvelope> events, std::vector<std::uint64_t> disconnect_after = {},
                        std::size_t replay_overlap = 0);

  std::optional<EventEnvelope> next() override;
  void reconnect(std::uint64_t last_seq) override;

  /// Number of scripted reconnect attempts that should fail before one
  /// succeeds.
  void fail_reconnects(int count) { failing_reconnects_ = count; }
  int reconnect_calls() const { return reconnect_calls_; }

 private:
  std::vector<EventEnvelope> events_;
  std::vector<std::uint64_t> disconnect_after_;
  std::size_t replay_overlap_;
  std::size_t pos_ = 0;
  bool connected_ = true;
  int failing_reconnects_ = 0;
  int reconnect_calls_ = 0;
};

}  // namespace paperfeed::ingest
