#pragma once

#include <stdexcept>
#include <string>

namespace sportsim {

enum class ErrorCode {
  kInvalidState,
  kDomain,
  kNoSolution,
  kDegenerateTarget,
  kSimulationBlowup,
  kConfiguration,
  kInvalidAction,
  kProtocol,
  kConnection,
  kIncompatible,
  kIntegrity,
  kIo,
};

const char* to_string(ErrorCode code);

// Every failure the engine reports carries one of the codes above so callers
// (CLI exit codes, bridge error frames) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sportsim
