#pragma once

#include <stdexcept>
#include <string>

namespace wfpp {

enum class ErrorKind {
  config,
  config_mismatch,
  domain,
  file_not_found,
  io,
  format,
  empty_table,
  empty_corpus,
  empty_caption,
  empty_entry_list,
  index_out_of_range,
  subset_violation,
};

const char* to_string(ErrorKind kind);

// Process exit code for an error escaping a CLI stage:
// 2 configuration, 3 I/O, 4 internal invariant violation.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wfpp
