#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>

#include "cli.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("semaug"));
  std::vector<std::string> args(argv + 1, argv + argc);
  return semaug::cli::run(args);
}
