#pragma once

// Minimal zip/jar reader: walks the central directory and inflates members.
// Nested archives are returned as plain members, never opened.

#include <zlib.h>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coupling/error.hpp"

namespace coupling {

struct ArchiveMember {
  std::string name;
  std::vector<std::uint8_t> data;
};

namespace zip {

inline constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
inline constexpr std::uint32_t kCentralHeader = 0x02014b50;
inline constexpr std::uint32_t kLocalHeader = 0x04034b50;

inline std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 2 > b.size()) throw FormatError("truncated zip structure", at);
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 4 > b.size()) throw FormatError("truncated zip structure", at);
  return std::uint32_t{b[at]} | std::uint32_t{b[at + 1]} << 8 |
         std::uint32_t{b[at + 2]} << 16 | std::uint32_t{b[at + 3]} << 24;
}

inline std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in,
                                             std::size_t expected,
                                             std::size_t at) {
  std::vector<std::uint8_t> out(expected == 0 ? 1 : expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK)
    throw FormatError("inflate initialization failed", at);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  std::size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected)
    throw FormatError("corrupt deflate stream", at);
  out.resize(expected);
  return out;
}

}  // namespace zip

inline bool looks_like_zip(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && zip::le32(bytes, 0) == zip::kLocalHeader;
}

/// Members of a zip archive whose names satisfy `wanted`, in central
/// directory order. Directory entries are skipped.
inline std::vector<ArchiveMember> read_zip(
    std::span<const std::uint8_t> bytes,
    const std::function<bool(std::string_view)>& wanted) {
  using namespace zip;
  if (bytes.size() < 22) throw FormatError("too short for a zip archive", 0);

  // The end record sits within the last 64 KiB + 22 bytes (trailing comment).
  std::size_t floor = bytes.size() > 0xFFFF + 22 ? bytes.size() - 0xFFFF - 22 : 0;
  std::size_t eocd = bytes.size() - 22;
  while (le32(bytes, eocd) != kEndOfCentralDir) {
    if (eocd == floor) throw FormatError("no end of central directory record", 0);
    --eocd;
  }
  std::uint16_t entries = le16(bytes, eocd + 10);
  std::uint32_t cd_offset = le32(bytes, eocd + 16);
  if (entries == 0xFFFF || cd_offset == 0xFFFFFFFF)
    throw FormatError("zip64 archives are not supported", eocd);

  std::vector<ArchiveMember> members;
  std::size_t at = cd_offset;
  for (std::uint16_t i = 0; i < entries; ++i) {
    if (le32(bytes, at) != kCentralHeader)
      throw FormatError("bad central directory header", at);
    std::uint16_t flags = le16(bytes, at + 8);
    std::uint16_t method = le16(bytes, at + 10);
    std::uint32_t crc = le32(bytes, at + 16);
    std::uint32_t csize = le32(bytes, at + 20);
    std::uint32_t usize = le32(bytes, at + 24);
    std::uint16_t name_len = le16(bytes, at + 28);
    std::uint16_t extra_len = le16(bytes, at + 30);
    std::uint16_t comment_len = le16(bytes, at + 32);
    std::uint32_t local = le32(bytes, at + 42);
    if (at + 46 + name_len > bytes.size())
      throw FormatError("truncated central directory name", at);
    std::string name(reinterpret_cast<const char*>(bytes.data() + at + 46),
                     name_len);
    std::size_t entry_at = at;
    at += 46u + name_len + extra_len + comment_len;

    if (name.ends_with('/') || !wanted(name)) continue;
    if (flags & 1u) throw FormatError("encrypted member '" + name + "'", entry_at);
    if (csize == 0xFFFFFFFF || usize == 0xFFFFFFFF)
      throw FormatError("zip64 member '" + name + "' is not supported", entry_at);

    if (le32(bytes, local) != kLocalHeader)
      throw FormatError("bad local header for '" + name + "'", local);
    std::size_t data_at =
        local + 30u + le16(bytes, local + 26) + le16(bytes, local + 28);
    if (data_at + csize > bytes.size())
      throw FormatError("truncated data for '" + name + "'", data_at);
    auto raw = bytes.subspan(data_at, csize);

    ArchiveMember m{std::move(name), {}};
    if (method == 0) {
      if (csize != usize) throw FormatError("stored size mismatch", entry_at);
      m.data.assign(raw.begin(), raw.end());
    } else if (method == 8) {
      m.data = inflate_raw(raw, usize, data_at);
    } else {
      throw FormatError("unsupported compression method " +
                            std::to_string(method) + " for '" + m.name + "'",
                        entry_at);
    }
    auto actual = crc32(0L, m.data.data(), static_cast<uInt>(m.data.size()));
    if (actual != crc) throw FormatError("crc mismatch for '" + m.name + "'", data_at);
    members.push_back(std::move(m));
  }
  return members;
}

}  // namespace coupling
