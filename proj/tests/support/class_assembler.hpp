#pragma once

// Test-only JVM class-file assembler. Builds byte-exact class files from
// explicit instruction sequences and keeps a javap-style listing of every
// instruction it emitted, so fixtures can be checked against hand counts.

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace coupling::support {

class Code {
public:
  Code& op(std::uint8_t opcode, std::string mnemonic) {
    bytes_.push_back(opcode);
    listing_.push_back(std::move(mnemonic));
    return *this;
  }
  Code& u1(std::uint8_t v) {
    bytes_.push_back(v);
    return *this;
  }
  Code& u2(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
    bytes_.push_back(static_cast<std::uint8_t>(v));
    return *this;
  }
  Code& s4(std::int32_t v) {
    auto u = static_cast<std::uint32_t>(v);
    for (int shift : {24, 16, 8, 0}) bytes_.push_back(static_cast<std::uint8_t>(u >> shift));
    return *this;
  }
  Code& pad_to_4() {
    while (bytes_.size() % 4 != 0) bytes_.push_back(0);
    return *this;
  }

  std::size_t size() const { return bytes_.size(); }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  const std::vector<std::string>& listing() const { return listing_; }

private:
  std::vector<std::uint8_t> bytes_;
  std::vector<std::string> listing_;
};

class ClassAssembler {
public:
  static constexpr std::uint16_t kPublic = 0x0001;
  static constexpr std::uint16_t kStatic = 0x0008;
  static constexpr std::uint16_t kInterface = 0x0200;
  static constexpr std::uint16_t kAbstract = 0x0400;

  explicit ClassAssembler(std::string internal_name,
                          std::string super_name = "java/lang/Object",
                          std::uint16_t major = 52)
      : name_(std::move(internal_name)), major_(major) {
    this_class_ = class_ref(name_);
    super_class_ = class_ref(super_name);
  }

  const std::string& name() const { return name_; }

  // ---- constant pool -------------------------------------------------------

  std::uint16_t utf8(const std::string& s) {
    return intern({1, s, 0, 0}, [&] {
      pool_.push_back(1);
      put_u2(pool_, static_cast<std::uint16_t>(s.size()));
      pool_.insert(pool_.end(), s.begin(), s.end());
    });
  }

  std::uint16_t class_ref(const std::string& internal) {
    auto n = utf8(internal);
    return intern({7, "", n, 0}, [&] {
      pool_.push_back(7);
      put_u2(pool_, n);
    });
  }

  std::uint16_t name_and_type(const std::string& name, const std::string& desc) {
    auto n = utf8(name);
    auto d = utf8(desc);
    return intern({12, "", n, d}, [&] {
      pool_.push_back(12);
      put_u2(pool_, n);
      put_u2(pool_, d);
    });
  }

  std::uint16_t method_ref(const std::string& owner, const std::string& name,
                           const std::string& desc, bool interface = false) {
    auto c = class_ref(owner);
    auto nt = name_and_type(name, desc);
    std::uint8_t tag = interface ? 11 : 10;
    return intern({tag, "", c, nt}, [&] {
      pool_.push_back(tag);
      put_u2(pool_, c);
      put_u2(pool_, nt);
    });
  }

  std::uint16_t field_ref(const std::string& owner, const std::string& name,
                          const std::string& desc) {
    auto c = class_ref(owner);
    auto nt = name_and_type(name, desc);
    return intern({9, "", c, nt}, [&] {
      pool_.push_back(9);
      put_u2(pool_, c);
      put_u2(pool_, nt);
    });
  }

  std::uint16_t invoke_dynamic(std::uint16_t bootstrap, const std::string& name,
                               const std::string& desc) {
    auto nt = name_and_type(name, desc);
    return intern({18, "", bootstrap, nt}, [&] {
      pool_.push_back(18);
      put_u2(pool_, bootstrap);
      put_u2(pool_, nt);
    });
  }

  std::uint16_t long_const(std::int64_t v) {
    auto index = next_index_;
    pool_.push_back(5);
    auto u = static_cast<std::uint64_t>(v);
    for (int shift = 56; shift >= 0; shift -= 8)
      pool_.push_back(static_cast<std::uint8_t>(u >> shift));
    next_index_ += 2;
    return index;
  }

  std::uint16_t string_const(const std::string& s) {
    auto u = utf8(s);
    return intern({8, "", u, 0}, [&] {
      pool_.push_back(8);
      put_u2(pool_, u);
    });
  }

  // ---- instructions --------------------------------------------------------

  void invokestatic(Code& c, const std::string& owner, const std::string& name,
                    const std::string& desc = "()V", bool interface = false) {
    c.op(0xb8, "invokestatic " + owner + "." + name).u2(method_ref(owner, name, desc, interface));
  }
  void invokevirtual(Code& c, const std::string& owner, const std::string& name,
                     const std::string& desc = "()V") {
    c.op(0xb6, "invokevirtual " + owner + "." + name).u2(method_ref(owner, name, desc));
  }
  void invokespecial(Code& c, const std::string& owner, const std::string& name,
                     const std::string& desc = "()V", bool interface = false) {
    c.op(0xb7, "invokespecial " + owner + "." + name).u2(method_ref(owner, name, desc, interface));
  }
  void invokeinterface(Code& c, const std::string& owner, const std::string& name,
                       const std::string& desc = "()V", std::uint8_t args = 1) {
    c.op(0xb9, "invokeinterface " + owner + "." + name)
        .u2(method_ref(owner, name, desc, true))
        .u1(args)
        .u1(0);
  }
  void invokedynamic(Code& c, const std::string& name, const std::string& desc) {
    c.op(0xba, "invokedynamic " + name).u2(invoke_dynamic(0, name, desc)).u2(0);
  }

  // ---- members -------------------------------------------------------------

  void set_access(std::uint16_t flags) { access_ = flags; }

  void add_interface(const std::string& internal) {
    interfaces_.push_back(class_ref(internal));
  }

  void add_field(const std::string& name, const std::string& desc) {
    std::vector<std::uint8_t> f;
    put_u2(f, kPublic);
    put_u2(f, utf8(name));
    put_u2(f, utf8(desc));
    put_u2(f, 0);
    fields_.push_back(std::move(f));
  }

  /// Method with a Code attribute. `extra_code_attribute` appends a dummy
  /// attribute inside Code (as a LineNumberTable would be).
  void add_method(const std::string& name, const std::string& desc, const Code& code,
                  std::uint16_t access = kPublic, bool extra_code_attribute = false) {
    std::vector<std::uint8_t> body;
    put_u2(body, 8);  // max_stack
    put_u2(body, 8);  // max_locals
    put_u4(body, static_cast<std::uint32_t>(code.size()));
    body.insert(body.end(), code.bytes().begin(), code.bytes().end());
    put_u2(body, 0);  // exception table
    if (extra_code_attribute) {
      put_u2(body, 1);
      put_u2(body, utf8("LineNumberTable"));
      put_u4(body, 6);
      put_u2(body, 1);
      put_u2(body, 0);
      put_u2(body, 1);
    } else {
      put_u2(body, 0);
    }

    std::vector<std::uint8_t> m;
    put_u2(m, access);
    put_u2(m, utf8(name));
    put_u2(m, utf8(desc));
    put_u2(m, 1);
    put_u2(m, utf8("Code"));
    put_u4(m, static_cast<std::uint32_t>(body.size()));
    m.insert(m.end(), body.begin(), body.end());
    methods_.push_back(std::move(m));
    for (const auto& line : code.listing()) listing_.push_back(name + ": " + line);
  }

  void add_abstract_method(const std::string& name, const std::string& desc) {
    std::vector<std::uint8_t> m;
    put_u2(m, kPublic | kAbstract);
    put_u2(m, utf8(name));
    put_u2(m, utf8(desc));
    put_u2(m, 0);
    methods_.push_back(std::move(m));
  }

  std::vector<std::uint8_t> bytes() {
    auto source = utf8("SourceFile");
    auto file = utf8(name_ + ".java");
    std::vector<std::uint8_t> out;
    put_u4(out, 0xCAFEBABE);
    put_u2(out, 0);
    put_u2(out, major_);
    put_u2(out, next_index_);
    out.insert(out.end(), pool_.begin(), pool_.end());
    put_u2(out, access_);
    put_u2(out, this_class_);
    put_u2(out, super_class_);
    put_u2(out, static_cast<std::uint16_t>(interfaces_.size()));
    for (auto i : interfaces_) put_u2(out, i);
    put_u2(out, static_cast<std::uint16_t>(fields_.size()));
    for (const auto& f : fields_) out.insert(out.end(), f.begin(), f.end());
    put_u2(out, static_cast<std::uint16_t>(methods_.size()));
    for (const auto& m : methods_) out.insert(out.end(), m.begin(), m.end());
    put_u2(out, 1);
    put_u2(out, source);
    put_u4(out, 2);
    put_u2(out, file);
    return out;
  }

  /// Every instruction emitted into a method, "method: mnemonic owner.name".
  const std::vector<std::string>& listing() const { return listing_; }

  static void put_u2(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
  }
  static void put_u4(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int shift : {24, 16, 8, 0}) v.push_back(static_cast<std::uint8_t>(x >> shift));
  }

private:
  using Key = std::tuple<std::uint8_t, std::string, std::uint16_t, std::uint16_t>;

  template <typename Emit>
  std::uint16_t intern(const Key& key, Emit&& emit) {
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    emit();
    auto index = next_index_++;
    index_.emplace(key, index);
    return index;
  }

  std::string name_;
  std::uint16_t major_;
  std::uint16_t access_ = kPublic;
  std::uint16_t this_class_ = 0;
  std::uint16_t super_class_ = 0;
  std::uint16_t next_index_ = 1;
  std::vector<std::uint8_t> pool_;
  std::map<Key, std::uint16_t> index_;
  std::vector<std::uint16_t> interfaces_;
  std::vector<std::vector<std::uint8_t>> fields_;
  std::vector<std::vector<std::uint8_t>> methods_;
  std::vector<std::string> listing_;
};

}  // namespace coupling::support
