#include "paperfeed/ingest/event_source.hpp"

#include <algorithm>

namespace paperfeed::ingest {

JsonlFileSource::JsonlFileSource(std::filesystem::path path) : path_(std::move(path)), in_(path_) {
  if (!in_) throw Error("cannot open event log " + path_.string());
}

std::optional<EventEnvelope> JsonlFileSource::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return parse_event_line(line);
    } catch (const Error& e) {
      throw ParseError(path_.string() + ":" + std::to_string(line_no_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

void JsonlFileSource::reconnect(std::uint64_t /*last_seq*/) {
  // Files are replayed from the start; the reader skips what it has seen.
  in_.close();
  in_.clear();
  in_.open(path_);
  line_no_ = 0;
  if (!in_) throw StreamDisconnected("cannot reopen " + path_.string());
}

VectorSource::VectorSource(std::vector<EventEnvelope> events, std::vector<std::uint64_t> disconnect_after,
                           std::size_t replay_overlap)
    : events_(std::move(events)), disconnect_after_(std::move(disconnect_after)), replay_overlap_(replay_overlap) {}

std::optional<EventEnvelope> VectorSource::next() {
  if (!connected_) throw StreamDisconnected("not connected");
  if (pos_ >= events_.size()) return std::nullopt;
  const auto& event = events_[pos_];
  // Disconnect once, right after delivering a scripted seq.
  if (pos_ > 0) {
    const auto prev = events_[pos_ - 1].seq;
    auto it = std::find(disconnect_after_.begin(), disconnect_after_.end(), prev);
    if (it != disconnect_after_.end()) {
      disconnect_after_.erase(it);
      connected_ = false;
      throw StreamDisconnected("scripted disconnect after seq " + std::to_string(prev));
    }
  }
  ++pos_;
  return event;
}

void VectorSource::reconnect(std::uint64_t last_seq) {
  ++reconnect_calls_;
  if (failing_reconnects_ > 0) {
    --failing_reconnects_;
    throw StreamDisconnected("scripted reconnect failure");
  }
  std::size_t resume = 0;
  while (resume < events_.size() && events_[resume].seq <= last_seq) ++resume;
  pos_ = resume > replay_overlap_ ? resume - replay_overlap_ : 0;
  connected_ = true;
}

}  // namespace paperfeed::ingest
