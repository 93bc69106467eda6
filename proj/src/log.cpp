#include "jigsaw/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace jigsaw {

void init_logging() {
  auto logger = spdlog::stderr_color_mt("jigsaw");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  const char* env = std::getenv("JIGSAW_LOG");
  const auto level = spdlog::level::from_str(env ? env : "info");
  spdlog::set_level(level == spdlog::level::off && !(env && std::string(env) == "off") ? spdlog::level::info : level);
}

}  // namespace jigsaw
