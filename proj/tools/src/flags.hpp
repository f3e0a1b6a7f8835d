#pragma once

// The single flag table. The parser registers options from it and the help
// text is generated from the same entries.

#include <string>
#include <vector>

namespace boxcert::cli {

enum Command : unsigned {
  kBounds = 1u << 0,
  kVerify = 1u << 1,
  kMinimize = 1u << 2,
  kMaximize = 1u << 3,
  kCertify = 1u << 4,
  kSelftest = 1u << 5,
};
inline constexpr unsigned kOptimize = kMinimize | kMaximize;
inline constexpr unsigned kSearch = kVerify | kCertify;
inline constexpr unsigned kAll = kBounds | kVerify | kOptimize | kCertify | kSelftest;

enum class FlagKind { Value, Switch, Repeated };

struct Flag {
  const char* name;  // without the leading dashes
  FlagKind kind;
  const char* value;  // placeholder shown in help
  const char* help;
  unsigned commands;
  unsigned required = 0;
  /// Config leaf set by this flag; "{budget}" expands to "bab" or "opt".
  const char* key = nullptr;
};

struct CommandInfo {
  const char* name;
  Command id;
  const char* summary;
};

const std::vector<Flag>& flag_table();
const std::vector<CommandInfo>& command_table();

}  // namespace boxcert::cli
