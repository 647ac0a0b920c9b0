#include "paperfeed/common/clock.hpp"

namespace paperfeed {

Timestamp SystemClock::now() const {
  return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
}

}  // namespace paperfeed
