#pragma once

#include <stdexcept>
#include <string>

namespace hexcut {

// Input content that fails a precondition or schema check (bad magic bytes,
// out-of-range parameter, degenerate polygon). Maps to CLI exit code 2.
class validation_error : public std::runtime_error {
public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure: missing file, unreadable or unwritable path.
// Maps to CLI exit code 4.
class io_error : public std::runtime_error {
public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Failure inside a pipeline stage, annotated with the stage name so callers
// can report where the run stopped. Maps to CLI exit code 3.
class pipeline_error : public std::runtime_error {
public:
  pipeline_error(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

}  // namespace hexcut
