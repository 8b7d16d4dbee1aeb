#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace delib::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

inline Level level() {
  static Level lv = [] {
    const char* e = std::getenv("DELIB_LOG");
    if (!e) return Level::Error;
    if (std::strcmp(e, "debug") == 0) return Level::Debug;
    if (std::strcmp(e, "info") == 0) return Level::Info;
    return Level::Error;
  }();
  return lv;
}

template <typename... Args>
void error(const char* fmt, Args... args) {
  std::fprintf(stderr, "[error] ");
  std::fprintf(stderr, fmt, args...);
  std::fprintf(stderr, "\n");
}

template <typename... Args>
void info(const char* fmt, Args... args) {
  if (level() >= Level::Info) {
    std::fprintf(stderr, "[info] ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
  }
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
  if (level() >= Level::Debug) {
    std::fprintf(stderr, "[debug] ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
  }
}

}  // namespace delib::log
