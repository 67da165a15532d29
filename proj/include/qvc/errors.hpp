#pragma once

#include <stdexcept>
#include <string>

namespace qvc {

/// Root of every error the engine throws. Callers that only need to report
/// a failure can catch this; the subclasses carry the category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept = 0;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "invalid-argument"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "shape-error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config-error"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "numerical-error"; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "usage-error"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "io-error"; }
};

/// Container (QVCW / QVCF) decoding failures.
class LoadError : public Error {
 public:
  enum class Kind { BadMagic, BadVersion, Truncated, BadHeader, SizeMismatch, Checksum, Manifest };

  LoadError(Kind kind, const std::string& what);
  Kind kind() const noexcept { return kind_; }
  const char* category() const noexcept override;

 private:
  Kind kind_;
};

/// RIFF/WAVE decoding failures.
class WavError : public Error {
 public:
  enum class Kind { Malformed, UnsupportedCodec, UnsupportedChannels, UnsupportedRate, UnsupportedBitDepth };

  WavError(Kind kind, const std::string& what);
  Kind kind() const noexcept { return kind_; }
  const char* category() const noexcept override;

 private:
  Kind kind_;
};

}  // namespace qvc
