#include "wfpp/error.hpp"

namespace wfpp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::config_mismatch: return "ConfigMismatch";
    case ErrorKind::domain: return "DomainError";
    case ErrorKind::file_not_found: return "FileNotFound";
    case ErrorKind::io: return "IoError";
    case ErrorKind::format: return "FormatError";
    case ErrorKind::empty_table: return "EmptyTable";
    case ErrorKind::empty_corpus: return "EmptyCorpus";
    case ErrorKind::empty_caption: return "EmptyCaption";
    case ErrorKind::empty_entry_list: return "EmptyEntryList";
    case ErrorKind::index_out_of_range: return "IndexOutOfRange";
    case ErrorKind::subset_violation: return "SubsetViolation";
  }
  return "Error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::config_mismatch:
    case ErrorKind::domain:
    case ErrorKind::empty_entry_list:
      return 2;
    case ErrorKind::file_not_found:
    case ErrorKind::io:
    case ErrorKind::format:
      return 3;
    default:
      return 4;
  }
}

}  // namespace wfpp
