#pragma once

// Structured logging: one JSON object per line on stderr. Tests install a
// capture sink to assert on events such as retry schedules.

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace qaea::log {

enum class Level { debug, info, warn, error };

struct Record {
  Level level = Level::info;
  std::string event;
  std::map<std::string, std::string> fields;
};

using Sink = std::function<void(const Record&)>;

void emit(Level level, std::string event, std::map<std::string, std::string> fields = {});

inline void info(std::string event, std::map<std::string, std::string> fields = {}) {
  emit(Level::info, std::move(event), std::move(fields));
}
inline void warn(std::string event, std::map<std::string, std::string> fields = {}) {
  emit(Level::warn, std::move(event), std::move(fields));
}

/// Records below this level are dropped before reaching any sink.
void set_min_level(Level level);

/// Replaces the stderr writer. Pass nullptr to restore it.
void set_sink(Sink sink);

/// RAII capture for tests: collects every record while alive.
class Capture {
 public:
  Capture();
  ~Capture();
  Capture(const Capture&) = delete;
  Capture& operator=(const Capture&) = delete;

  std::vector<Record> records() const;
  std::vector<Record> events(const std::string& name) const;

 private:
  struct State;
  State* state_;
};

}  // namespace qaea::log
