#pragma once

// File plumbing: whole-file reads, a buffered line reader that decompresses
// gzip input transparently, and a text sink that can gzip its output.

#include <zlib.h>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "coupling/error.hpp"

#include <unistd.h>

namespace coupling {

inline std::vector<std::uint8_t> read_binary_file(
    const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  if (is.bad()) throw IoError("read failed for '" + path.string() + "'");
  return data;
}

/// Reads newline-delimited text from a file (or "-" for stdin). Gzip input
/// is recognized by its magic bytes and inflated on the fly; plain input
/// passes through unchanged.
class LineReader {
public:
  explicit LineReader(const std::string& path, std::size_t buffer = 1 << 20)
      : name_(path == "-" ? "<stdin>" : path), buf_(buffer) {
    if (path == "-") {
      int fd = dup(STDIN_FILENO);
      file_ = fd < 0 ? nullptr : gzdopen(fd, "rb");
    } else {
      file_ = gzopen(path.c_str(), "rb");
    }
    if (!file_)
      throw IoError("cannot open '" + name_ + "': " + std::strerror(errno));
    gzbuffer(file_, 1 << 17);
  }

  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  ~LineReader() {
    if (file_) gzclose(file_);
  }

  const std::string& name() const noexcept { return name_; }

  /// Next line without its terminator; false at end of input. The view is
  /// valid until the next call.
  bool next(std::string_view& line) {
    while (true) {
      auto* begin = buf_.data() + pos_;
      auto* nl = static_cast<char*>(std::memchr(begin, '\n', end_ - pos_));
      if (nl) {
        line = std::string_view(begin, static_cast<std::size_t>(nl - begin));
        pos_ = static_cast<std::size_t>(nl - buf_.data()) + 1;
        return true;
      }
      if (eof_) {
        if (pos_ == end_) return false;
        line = std::string_view(begin, end_ - pos_);
        pos_ = end_;
        return true;
      }
      fill();
    }
  }

private:
  void fill() {
    std::memmove(buf_.data(), buf_.data() + pos_, end_ - pos_);
    end_ -= pos_;
    pos_ = 0;
    if (end_ == buf_.size()) buf_.resize(buf_.size() * 2);
    int n = gzread(file_, buf_.data() + end_,
                   static_cast<unsigned>(buf_.size() - end_));
    if (n < 0) {
      int code = 0;
      const char* msg = gzerror(file_, &code);
      throw IoError("read failed for '" + name_ + "': " + msg);
    }
    if (n == 0) eof_ = true;
    end_ += static_cast<std::size_t>(n);
  }

  std::string name_;
  gzFile file_ = nullptr;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
};

/// Text output to a file, gzip-compressed when requested.
class TextSink {
public:
  TextSink(const std::filesystem::path& path, bool gzip, int level = 1)
      : name_(path.string()) {
    if (gzip) {
      std::string mode = "wb" + std::to_string(level);
      gz_ = gzopen(name_.c_str(), mode.c_str());
      if (!gz_) throw IoError("cannot write '" + name_ + "'");
      gzbuffer(gz_, 1 << 17);
    } else {
      plain_ = std::fopen(name_.c_str(), "wb");
      if (!plain_) throw IoError("cannot write '" + name_ + "'");
    }
  }

  TextSink(const TextSink&) = delete;
  TextSink& operator=(const TextSink&) = delete;

  ~TextSink() {
    try {
      close();
    } catch (...) {
    }
  }

  void write(std::string_view text) {
    if (text.empty()) return;
    bool ok = gz_ ? gzwrite(gz_, text.data(), static_cast<unsigned>(text.size())) ==
                        static_cast<int>(text.size())
                  : std::fwrite(text.data(), 1, text.size(), plain_) == text.size();
    if (!ok) throw IoError("write failed for '" + name_ + "'");
  }

  void close() {
    if (gz_) {
      int rc = gzclose(gz_);
      gz_ = nullptr;
      if (rc != Z_OK) throw IoError("close failed for '" + name_ + "'");
    }
    if (plain_) {
      int rc = std::fclose(plain_);
      plain_ = nullptr;
      if (rc != 0) throw IoError("close failed for '" + name_ + "'");
    }
  }

private:
  std::string name_;
  gzFile gz_ = nullptr;
  std::FILE* plain_ = nullptr;
};

}  // namespace coupling
