#pragma once

#include <stdexcept>
#include <string>

namespace onom {

/// Raised for violated preconditions and malformed inputs across the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input files that cannot be opened; the CLI maps these to exit code 2.
class IoError : public Error {
 public:
  explicit IoError(const std::string& path)
      : Error("cannot open '" + path + "'"), path_(path) {}
  IoError(const std::string& path, const std::string& what)
      : Error(what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace onom
