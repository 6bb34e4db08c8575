#ifndef REPLAN_TEST_UTIL_HPP
#define REPLAN_TEST_UTIL_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

inline std::string data_path(const std::string& rel) {
  return std::string(REPLAN_DATA_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_data(const std::string& rel) {
  return read_file(data_path(rel));
}

}  // namespace testutil

#endif
