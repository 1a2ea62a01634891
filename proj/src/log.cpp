#include "qaea/log.hpp"

#include <iostream>
#include <mutex>

#include <json.hpp>

namespace qaea::log {
namespace {

std::mutex g_mutex;
Sink g_sink;
Level g_min = Level::info;

const char* level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}

}  // namespace

void emit(Level level, std::string event, std::map<std::string, std::string> fields) {
  Record record{level, std::move(event), std::move(fields)};
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(record);
    return;
  }
  if (level < g_min) return;
  nlohmann::json line = {{"level", level_name(level)}, {"event", record.event}};
  for (const auto& [key, value] : record.fields) line[key] = value;
  std::cerr << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

void set_min_level(Level level) {
  std::lock_guard lock(g_mutex);
  g_min = level;
}

void set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

struct Capture::State {
  mutable std::mutex mutex;
  std::vector<Record> records;
  Sink previous;
};

Capture::Capture() : state_(new State) {
  std::lock_guard lock(g_mutex);
  state_->previous = std::move(g_sink);
  g_sink = [state = state_](const Record& r) {
    std::lock_guard inner(state->mutex);
    state->records.push_back(r);
  };
}

Capture::~Capture() {
  {
    std::lock_guard lock(g_mutex);
    g_sink = std::move(state_->previous);
  }
  delete state_;
}

std::vector<Record> Capture::records() const {
  std::lock_guard lock(state_->mutex);
  return state_->records;
}

std::vector<Record> Capture::events(const std::string& name) const {
  std::vector<Record> out;
  for (auto& r : records())
    if (r.event == name) out.push_back(r);
  return out;
}

}  // namespace qaea::log
