#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace edgecache {

using Bytes = std::uint64_t;

/// Identifies one representation of one segment of one video.
/// `segment` and `level` are 1-based; `video` is the catalog index.
struct SegmentKey {
  std::uint32_t video = 0;
  std::uint32_t segment = 1;
  std::uint32_t level = 1;

  friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;
};

inline std::string toString(const SegmentKey& k) {
  return "(" + std::to_string(k.video) + "," + std::to_string(k.segment) + "," +
         std::to_string(k.level) + ")";
}

/// Library error. `code()` is a short stable tag such as "delta1-overflow".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Where a segment transfer originates, seen from the requesting MEC.
enum class SourceKind : std::uint8_t { Local, Neighbor, Cloud, Defer };

struct Source {
  SourceKind kind = SourceKind::Cloud;
  int mec = -1;  // neighbor id when kind == Neighbor

  friend bool operator==(const Source&, const Source&) = default;
};

inline const char* toString(SourceKind k) {
  switch (k) {
    case SourceKind::Local: return "local";
    case SourceKind::Neighbor: return "neighbor";
    case SourceKind::Cloud: return "cloud";
    case SourceKind::Defer: return "defer";
  }
  return "?";
}

}  // namespace edgecache

template <>
struct std::hash<edgecache::SegmentKey> {
  std::size_t operator()(const edgecache::SegmentKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{k.video} << 40) ^ (std::uint64_t{k.segment} << 16) ^ k.level;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};
