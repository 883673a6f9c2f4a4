// Copyright 2026 The tgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TGEN__LOG_HPP_
#define TGEN__LOG_HPP_

#include <cstdlib>
#include <iostream>
#include <string>

namespace tgen
{

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Level comes from the TG_LOG environment variable: error | info | debug.
inline LogLevel log_level()
{
  static const LogLevel level = [] {
    const char * env = std::getenv("TG_LOG");
    if (env == nullptr) {
      return LogLevel::kError;
    }
    const std::string v(env);
    if (v == "debug") {
      return LogLevel::kDebug;
    }
    if (v == "info") {
      return LogLevel::kInfo;
    }
    return LogLevel::kError;
  }();
  return level;
}

inline void log_error(const std::string & msg)
{
  std::cerr << "[tgen error] " << msg << "\n";
}

inline void log_info(const std::string & msg)
{
  if (log_level() >= LogLevel::kInfo) {
    std::cerr << "[tgen] " << msg << "\n";
  }
}

inline void log_debug(const std::string & msg)
{
  if (log_level() >= LogLevel::kDebug) {
    std::cerr << "[tgen debug] " << msg << "\n";
  }
}

}  // namespace tgen

#endif  // TGEN__LOG_HPP_
