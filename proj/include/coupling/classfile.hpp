#pragma once

// JVM class-file reader that extracts static call facts: for every invoke
// instruction in every method body, the class named by the referenced
// Methodref/InterfaceMethodref constant.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coupling/error.hpp"
#include "coupling/model.hpp"

namespace coupling {

/// Static call facts of one class: callee class -> number of call sites.
struct ClassFacts {
  std::string class_name;
  std::map<std::string, Weight> calls;

  // Bookkeeping over all invoke instructions seen in the class.
  std::uint64_t invoke_sites = 0;
  std::uint64_t skipped_self = 0;
  std::uint64_t skipped_array = 0;
  std::uint64_t skipped_dynamic = 0;

  Weight call_sites() const {
    Weight n = 0;
    for (const auto& [callee, count] : calls) n += count;
    return n;
  }
};

struct ClassFileOptions {
  // Java 25 is major version 69.
  unsigned max_major_version = 69;
  InnerClassMode inner_classes = InnerClassMode::KeepDistinct;
};

namespace classfile {

inline constexpr std::uint32_t kMagic = 0xCAFEBABE;

enum Tag : std::uint8_t {
  kUtf8 = 1,
  kInteger = 3,
  kFloat = 4,
  kLong = 5,
  kDouble = 6,
  kClass = 7,
  kString = 8,
  kFieldref = 9,
  kMethodref = 10,
  kInterfaceMethodref = 11,
  kNameAndType = 12,
  kMethodHandle = 15,
  kMethodType = 16,
  kDynamic = 17,
  kInvokeDynamic = 18,
  kModule = 19,
  kPackage = 20,
};

enum Opcode : std::uint8_t {
  kTableswitch = 0xaa,
  kLookupswitch = 0xab,
  kInvokevirtual = 0xb6,
  kInvokespecial = 0xb7,
  kInvokestatic = 0xb8,
  kInvokeinterface = 0xb9,
  kInvokedynamic = 0xba,
  kWide = 0xc4,
  kIinc = 0x84,
};

/// Encoded length of fixed-size instructions (opcode included); 0 marks
/// the variable-length ones, -1 an opcode that may not appear in a class file.
inline int instruction_length(std::uint8_t op) {
  static constexpr auto table = [] {
    std::array<signed char, 256> t{};
    for (auto& v : t) v = -1;
    for (int i = 0x00; i <= 0x0f; ++i) t[i] = 1;
    t[0x10] = 2;  // bipush
    t[0x11] = 3;  // sipush
    t[0x12] = 2;  // ldc
    t[0x13] = 3;  // ldc_w
    t[0x14] = 3;  // ldc2_w
    for (int i = 0x15; i <= 0x19; ++i) t[i] = 2;  // xload
    for (int i = 0x1a; i <= 0x35; ++i) t[i] = 1;
    for (int i = 0x36; i <= 0x3a; ++i) t[i] = 2;  // xstore
    for (int i = 0x3b; i <= 0x83; ++i) t[i] = 1;
    t[0x84] = 3;  // iinc
    for (int i = 0x85; i <= 0x98; ++i) t[i] = 1;
    for (int i = 0x99; i <= 0xa8; ++i) t[i] = 3;  // branches, jsr
    t[0xa9] = 2;  // ret
    t[0xaa] = 0;
    t[0xab] = 0;
    for (int i = 0xac; i <= 0xb1; ++i) t[i] = 1;  // returns
    for (int i = 0xb2; i <= 0xb8; ++i) t[i] = 3;  // field access, invokes
    t[0xb9] = 5;  // invokeinterface
    t[0xba] = 5;  // invokedynamic
    t[0xbb] = 3;  // new
    t[0xbc] = 2;  // newarray
    t[0xbd] = 3;  // anewarray
    t[0xbe] = 1;
    t[0xbf] = 1;
    t[0xc0] = 3;  // checkcast
    t[0xc1] = 3;  // instanceof
    t[0xc2] = 1;
    t[0xc3] = 1;
    t[0xc4] = 0;  // wide
    t[0xc5] = 4;  // multianewarray
    t[0xc6] = 3;
    t[0xc7] = 3;
    t[0xc8] = 5;  // goto_w
    t[0xc9] = 5;  // jsr_w
    return t;
  }();
  return table[op];
}

class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t base = 0)
      : bytes_(bytes), base_(base) {}

  // Offset within the whole file.
  std::size_t offset() const noexcept { return base_ + pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  std::uint8_t u1(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }

  std::uint16_t u2(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] << 8 | bytes_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t u4(const char* what) {
    need(4, what);
    std::uint32_t v = std::uint32_t{bytes_[pos_]} << 24 |
                      std::uint32_t{bytes_[pos_ + 1]} << 16 |
                      std::uint32_t{bytes_[pos_ + 2]} << 8 |
                      std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n, const char* what) { take(n, what); }

private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      throw FormatError(std::string("truncated ") + what, offset());
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

struct PoolEntry {
  std::uint8_t tag = 0;
  std::uint16_t first = 0;   // class/name/ref index, depending on tag
  std::uint16_t second = 0;  // name-and-type / descriptor index
  std::string_view utf8;
};

class ConstantPool {
public:
  ConstantPool() = default;

  static ConstantPool read(ByteReader& in) {
    ConstantPool pool;
    std::uint16_t count = in.u2("constant pool count");
    pool.entries_.resize(count);
    for (std::size_t i = 1; i < count; ++i) {
      std::size_t at = in.offset();
      PoolEntry e;
      e.tag = in.u1("constant pool tag");
      switch (e.tag) {
        case kUtf8: {
          std::uint16_t len = in.u2("utf8 length");
          auto data = in.take(len, "utf8 constant");
          e.utf8 = {reinterpret_cast<const char*>(data.data()), data.size()};
          break;
        }
        case kInteger:
        case kFloat:
          in.skip(4, "numeric constant");
          break;
        case kLong:
        case kDouble:
          in.skip(8, "wide numeric constant");
          pool.entries_[i] = e;
          ++i;  // occupies two slots
          continue;
        case kClass:
        case kString:
        case kMethodType:
        case kModule:
        case kPackage:
          e.first = in.u2("constant index");
          break;
        case kFieldref:
        case kMethodref:
        case kInterfaceMethodref:
        case kNameAndType:
        case kDynamic:
        case kInvokeDynamic:
          e.first = in.u2("constant index");
          e.second = in.u2("constant index");
          break;
        case kMethodHandle:
          in.skip(1, "method handle kind");
          e.first = in.u2("constant index");
          break;
        default:
          throw FormatError("unknown constant pool tag " + std::to_string(e.tag),
                            at);
      }
      pool.entries_[i] = e;
    }
    return pool;
  }

  const PoolEntry& at(std::uint16_t index, std::uint8_t tag,
                      std::size_t offset) const {
    if (index == 0 || index >= entries_.size() || entries_[index].tag != tag)
      throw FormatError("constant pool index " + std::to_string(index) +
                            " does not name a tag-" + std::to_string(tag) +
                            " entry",
                        offset);
    return entries_[index];
  }

  std::string_view utf8(std::uint16_t index, std::size_t offset) const {
    return at(index, kUtf8, offset).utf8;
  }

  /// Internal-form class name ("a/b/C") of a Class constant.
  std::string_view class_name(std::uint16_t index, std::size_t offset) const {
    return utf8(at(index, kClass, offset).first, offset);
  }

  /// Owning class of a Methodref or InterfaceMethodref.
  std::string_view method_owner(std::uint16_t index, std::size_t offset) const {
    if (index == 0 || index >= entries_.size() ||
        (entries_[index].tag != kMethodref &&
         entries_[index].tag != kInterfaceMethodref))
      throw FormatError("invoke operand " + std::to_string(index) +
                            " is not a method reference",
                        offset);
    return class_name(entries_[index].first, offset);
  }

private:
  std::vector<PoolEntry> entries_;
};

inline std::string binary_to_dotted(std::string_view internal) {
  std::string out(internal);
  for (auto& ch : out)
    if (ch == '/') ch = '.';
  return out;
}

inline std::int32_t read_s4(std::span<const std::uint8_t> code, std::size_t at) {
  return static_cast<std::int32_t>(std::uint32_t{code[at]} << 24 |
                                   std::uint32_t{code[at + 1]} << 16 |
                                   std::uint32_t{code[at + 2]} << 8 |
                                   std::uint32_t{code[at + 3]});
}

/// Walks one method's bytecode; calls `on_invoke(opcode, pool_index, pc)` for
/// every invoke instruction. `base` is the file offset of code[0].
template <typename OnInvoke>
void scan_code(std::span<const std::uint8_t> code, std::size_t base,
               OnInvoke&& on_invoke) {
  std::size_t pc = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError(what, base + pc);
  };
  while (pc < code.size()) {
    std::uint8_t op = code[pc];
    int len = instruction_length(op);
    if (len < 0) fail("invalid opcode " + std::to_string(op));
    std::size_t size = static_cast<std::size_t>(len);
    if (op == kTableswitch || op == kLookupswitch) {
      std::size_t operands = (pc + 4) & ~std::size_t{3};
      std::size_t header = op == kTableswitch ? 12 : 8;
      if (operands + header > code.size()) fail("truncated switch");
      if (op == kTableswitch) {
        std::int64_t low = read_s4(code, operands + 4);
        std::int64_t high = read_s4(code, operands + 8);
        if (high < low) fail("tableswitch high < low");
        size = operands + header + 4 * static_cast<std::size_t>(high - low + 1) - pc;
      } else {
        std::int64_t pairs = read_s4(code, operands + 4);
        if (pairs < 0) fail("negative lookupswitch pair count");
        size = operands + header + 8 * static_cast<std::size_t>(pairs) - pc;
      }
    } else if (op == kWide) {
      if (pc + 1 >= code.size()) fail("truncated wide instruction");
      size = code[pc + 1] == kIinc ? 6 : 4;
    }
    if (pc + size > code.size()) fail("instruction runs past end of code");
    if (op >= kInvokevirtual && op <= kInvokedynamic) {
      auto index = static_cast<std::uint16_t>(code[pc + 1] << 8 | code[pc + 2]);
      on_invoke(op, index, base + pc);
    }
    pc += size;
  }
}

inline void skip_attributes(ByteReader& in) {
  std::uint16_t count = in.u2("attribute count");
  for (std::uint16_t i = 0; i < count; ++i) {
    in.u2("attribute name");
    std::uint32_t len = in.u4("attribute length");
    in.skip(len, "attribute body");
  }
}

}  // namespace classfile

/// Parses one class file and counts call sites per callee class.
///
/// invokevirtual, invokespecial, invokestatic and invokeinterface each count
/// one site for the class owning the referenced method. Calls into the
/// declaring class, array receivers ("[I" etc.) and invokedynamic are
/// skipped.
inline ClassFacts parse_class_file(std::span<const std::uint8_t> bytes,
                                   const ClassFileOptions& options = {}) {
  using namespace classfile;
  ByteReader in(bytes);
  if (in.remaining() < 4 || in.u4("magic") != kMagic)
    throw FormatError("bad magic, not a class file", 0);
  in.u2("minor version");
  std::uint16_t major = in.u2("major version");
  if (major > options.max_major_version)
    throw UnsupportedVersionError(major, options.max_major_version);

  auto pool = ConstantPool::read(in);

  in.u2("access flags");
  std::size_t this_at = in.offset();
  std::uint16_t this_class = in.u2("this_class");
  in.u2("super_class");
  std::uint16_t interfaces = in.u2("interface count");
  in.skip(std::size_t{interfaces} * 2, "interface table");

  ClassFacts facts;
  std::string self = binary_to_dotted(pool.class_name(this_class, this_at));
  if (!is_valid_class_name(self))
    throw FormatError("invalid class name '" + self + "'", this_at);
  facts.class_name = std::string(canonical_class(self, options.inner_classes));

  std::uint16_t fields = in.u2("field count");
  for (std::uint16_t i = 0; i < fields; ++i) {
    in.skip(6, "field info");
    skip_attributes(in);
  }

  auto on_invoke = [&](std::uint8_t op, std::uint16_t index, std::size_t at) {
    ++facts.invoke_sites;
    if (op == kInvokedynamic) {
      ++facts.skipped_dynamic;
      return;
    }
    auto owner = pool.method_owner(index, at);
    if (owner.starts_with('[')) {
      ++facts.skipped_array;
      return;
    }
    std::string callee = binary_to_dotted(owner);
    if (!is_valid_class_name(callee))
      throw FormatError("invalid callee class name '" + callee + "'", at);
    callee = std::string(canonical_class(callee, options.inner_classes));
    if (callee == facts.class_name) {
      ++facts.skipped_self;
      return;
    }
    ++facts.calls[callee];
  };

  std::uint16_t methods = in.u2("method count");
  for (std::uint16_t m = 0; m < methods; ++m) {
    in.skip(6, "method info");
    std::uint16_t attrs = in.u2("attribute count");
    for (std::uint16_t a = 0; a < attrs; ++a) {
      std::size_t name_at = in.offset();
      std::uint16_t name = in.u2("attribute name");
      std::uint32_t len = in.u4("attribute length");
      std::size_t body_at = in.offset();
      auto body = in.take(len, "attribute body");
      if (pool.utf8(name, name_at) != "Code") continue;

      ByteReader code_in(body, body_at);
      code_in.skip(4, "Code max_stack/max_locals");
      std::uint32_t code_len = code_in.u4("code length");
      std::size_t code_at = code_in.offset();
      auto code = code_in.take(code_len, "method code");
      scan_code(code, code_at, on_invoke);
      // Exception table and nested attributes are validated for framing only.
      std::uint16_t handlers = code_in.u2("exception table length");
      code_in.skip(std::size_t{handlers} * 8, "exception table");
      skip_attributes(code_in);
      if (code_in.remaining() != 0)
        throw FormatError("Code attribute length mismatch", body_at);
    }
  }
  skip_attributes(in);
  return facts;
}

}  // namespace coupling
