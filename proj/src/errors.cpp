#include "qvc/errors.hpp"

namespace qvc {

LoadError::LoadError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

const char* LoadError::category() const noexcept {
  switch (kind_) {
    case Kind::BadMagic: return "load-error/bad-magic";
    case Kind::BadVersion: return "load-error/bad-version";
    case Kind::Truncated: return "load-error/truncated";
    case Kind::BadHeader: return "load-error/bad-header";
    case Kind::SizeMismatch: return "load-error/size-mismatch";
    case Kind::Checksum: return "load-error/checksum";
    case Kind::Manifest: return "load-error/manifest";
  }
  return "load-error";
}

WavError::WavError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

const char* WavError::category() const noexcept {
  switch (kind_) {
    case Kind::Malformed: return "wav-error/malformed";
    case Kind::UnsupportedCodec: return "wav-error/unsupported-codec";
    case Kind::UnsupportedChannels: return "wav-error/unsupported-channels";
    case Kind::UnsupportedRate: return "wav-error/unsupported-rate";
    case Kind::UnsupportedBitDepth: return "wav-error/unsupported-bit-depth";
  }
  return "wav-error";
}

}  // namespace qvc
