#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// Flat `key = value` run configuration. `#` starts a comment; blank lines are
/// ignored; keys are option names without the leading dashes.
namespace mndt::config {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Entries = std::vector<std::pair<std::string, std::string>>;

/// Entries in file order; a repeated key keeps its last value. `source` names
/// the input in error messages.
Entries parse(std::istream& in, const std::string& source = "config");

Entries load(const std::string& path);

/// Appends `--key=value` for every entry whose option is not already present
/// in `args`, so command-line flags win over file values.
void merge_into_args(const Entries& entries, std::vector<std::string>& args);

} // namespace mndt::config
