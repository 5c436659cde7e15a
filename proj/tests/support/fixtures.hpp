#pragma once

// Hand-assembled class-file corpus. Each fixture carries the call-site counts
// read off its instruction listing by hand: one per invokevirtual /
// invokespecial / invokestatic / invokeinterface whose owner is another,
// non-array class; invokedynamic and self calls excluded.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "class_assembler.hpp"

namespace coupling::support {

struct Fixture {
  std::string class_name;  // dotted
  std::vector<std::uint8_t> bytes;
  std::vector<std::string> listing;
  std::map<std::string, std::uint64_t> expected;  // hand count per callee
  std::uint64_t invokes = 0;                      // all invoke instructions
  std::uint64_t skipped = 0;                      // self + array + indy
};

inline Fixture finish(ClassAssembler& a, std::map<std::string, std::uint64_t> expected,
                      std::uint64_t invokes, std::uint64_t skipped) {
  Fixture f;
  f.class_name = a.name();
  for (auto& ch : f.class_name)
    if (ch == '/') ch = '.';
  f.bytes = a.bytes();
  f.listing = a.listing();
  f.expected = std::move(expected);
  f.invokes = invokes;
  f.skipped = skipped;
  return f;
}

inline Code ret_code() {
  Code c;
  c.op(0xb1, "return");
  return c;
}

inline std::vector<Fixture> fixture_corpus() {
  std::vector<Fixture> out;

  {  // fx.Plain: one static call.
    ClassAssembler a("fx/Plain");
    Code c;
    a.invokestatic(c, "fx/Util", "helper");
    c.op(0xb1, "return");
    a.add_method("main", "([Ljava/lang/String;)V", c, ClassAssembler::kPublic | ClassAssembler::kStatic);
    out.push_back(finish(a, {{"fx.Util", 1}}, 1, 0));
  }
  {  // fx.Util: only calls into itself.
    ClassAssembler a("fx/Util");
    Code c;
    a.invokestatic(c, "fx/Util", "a");
    c.op(0x2a, "aload_0");
    a.invokevirtual(c, "fx/Util", "b");
    c.op(0xb1, "return");
    a.add_method("helper", "()V", c, ClassAssembler::kPublic | ClassAssembler::kStatic);
    a.add_method("a", "()V", ret_code(), ClassAssembler::kStatic);
    a.add_method("b", "()V", ret_code());
    out.push_back(finish(a, {}, 2, 2));
  }
  {  // fx.Api: interface, abstract methods only.
    ClassAssembler a("fx/Api");
    a.set_access(ClassAssembler::kPublic | ClassAssembler::kInterface | ClassAssembler::kAbstract);
    a.add_abstract_method("call", "()V");
    out.push_back(finish(a, {}, 0, 0));
  }
  {  // fx.Caller: virtual, interface and constructor calls.
    ClassAssembler a("fx/Caller");
    a.add_field("svc", "Lfx/Service;");
    Code init;
    init.op(0x2a, "aload_0");
    a.invokespecial(init, "java/lang/Object", "<init>");
    init.op(0xb1, "return");
    a.add_method("<init>", "()V", init);
    Code c;
    c.op(0x2b, "aload_1");
    a.invokevirtual(c, "fx/Service", "run");
    c.op(0x2b, "aload_1");
    a.invokevirtual(c, "fx/Service", "run");
    c.op(0x2c, "aload_2");
    a.invokeinterface(c, "fx/Api", "call");
    c.op(0xb1, "return");
    a.add_method("go", "(Lfx/Service;Lfx/Api;)V", c, ClassAssembler::kPublic, true);
    out.push_back(finish(a, {{"fx.Service", 2}, {"fx.Api", 1}, {"java.lang.Object", 1}}, 4, 0));
  }
  {  // fx.Service implements fx.Api.
    ClassAssembler a("fx/Service");
    a.add_interface("fx/Api");
    Code c;
    for (int i = 0; i < 3; ++i) a.invokestatic(c, "fx/Util", "helper");
    c.op(0x2a, "aload_0");
    a.invokeinterface(c, "fx/Api", "call");
    c.op(0xb1, "return");
    a.add_method("run", "()V", c);
    a.add_method("call", "()V", ret_code());
    out.push_back(finish(a, {{"fx.Util", 3}, {"fx.Api", 1}}, 4, 0));
  }
  {  // fx.Outer: uses its inner class.
    ClassAssembler a("fx/Outer");
    Code c;
    c.op(0xbb, "new fx/Outer$Inner").u2(a.class_ref("fx/Outer$Inner"));
    c.op(0x59, "dup");
    a.invokespecial(c, "fx/Outer$Inner", "<init>");
    c.op(0x4c, "astore_1");
    c.op(0x2b, "aload_1");
    a.invokevirtual(c, "fx/Outer$Inner", "go");
    c.op(0x2b, "aload_1");
    a.invokevirtual(c, "fx/Outer$Inner", "go");
    c.op(0xb1, "return");
    a.add_method("work", "()V", c);
    Code access;
    access.op(0xb1, "return");
    a.add_method("access$000", "()V", access, ClassAssembler::kStatic);
    out.push_back(finish(a, {{"fx.Outer$Inner", 3}}, 3, 0));
  }
  {  // fx.Outer$Inner: synthetic accessor call back into the outer class.
    ClassAssembler a("fx/Outer$Inner");
    Code c;
    a.invokestatic(c, "fx/Outer", "access$000");
    c.op(0xb1, "return");
    a.add_method("go", "()V", c);
    out.push_back(finish(a, {{"fx.Outer", 1}}, 1, 0));
  }
  {  // fx.Lambda: invokedynamic present, skipped.
    ClassAssembler a("fx/Lambda");
    Code c;
    a.invokedynamic(c, "run", "()Ljava/lang/Runnable;");
    c.op(0x4c, "astore_1");
    a.invokedynamic(c, "apply", "()Ljava/util/function/Function;");
    c.op(0x4d, "astore_2");
    a.invokestatic(c, "fx/Util", "helper");
    c.op(0xb1, "return");
    a.add_method("make", "()V", c);
    out.push_back(finish(a, {{"fx.Util", 1}}, 3, 2));
  }
  {  // fx.Arrays: array receiver skipped.
    ClassAssembler a("fx/Arrays");
    Code c;
    c.op(0x2b, "aload_1");
    a.invokevirtual(c, "[Ljava/lang/Object;", "clone", "()Ljava/lang/Object;");
    c.op(0x57, "pop");
    c.op(0x2b, "aload_1");
    a.invokestatic(c, "java/util/Arrays", "sort", "([Ljava/lang/Object;)V");
    c.op(0xb1, "return");
    a.add_method("sort", "([Ljava/lang/Object;)V", c);
    out.push_back(finish(a, {{"java.util.Arrays", 1}}, 2, 1));
  }
  {  // fx.Switchy: variable-length instructions whose operands contain
     // invoke opcode bytes.
    ClassAssembler a("fx/Switchy");
    auto big = a.long_const(0x00B8B9B6B7BA0000);
    Code c;
    c.op(0x14, "ldc2_w").u2(big);
    c.op(0x58, "pop2");
    a.invokestatic(c, "fx/Util", "helper");
    c.op(0x1b, "iload_1");
    c.op(0xaa, "tableswitch").pad_to_4();
    c.s4(0x000000b8).s4(0).s4(2);       // default, low, high
    c.s4(0x00b80000).s4(0xb6).s4(0xb9);  // 3 jump offsets
    c.op(0x1b, "iload_1");
    c.op(0xab, "lookupswitch").pad_to_4();
    c.s4(0xb7).s4(2);                    // default, npairs
    c.s4(0xb8).s4(0xb8).s4(0xba).s4(0xb6);
    c.op(0xc4, "wide iinc").u1(0x84).u2(0x00b8).u2(0xb8b8);
    c.op(0xc4, "wide iload").u1(0x15).u2(0x00b6);
    c.op(0x11, "sipush").u2(0xb8b8);
    c.op(0x57, "pop");
    a.invokestatic(c, "fx/Util", "helper");
    c.op(0x2a, "aload_0");
    a.invokevirtual(c, "fx/Service", "run");
    c.op(0xb1, "return");
    a.add_method("dispatch", "(I)V", c);
    out.push_back(finish(a, {{"fx.Util", 2}, {"fx.Service", 1}}, 3, 0));
  }
  {  // fx.Multi: several methods.
    ClassAssembler a("fx/Multi");
    Code init;
    init.op(0x2a, "aload_0");
    a.invokespecial(init, "java/lang/Object", "<init>");
    init.op(0xb1, "return");
    a.add_method("<init>", "()V", init);
    for (const char* m : {"first", "second"}) {
      Code c;
      c.op(0x01, "aconst_null");
      a.invokestatic(c, "fx/Plain", "main", "([Ljava/lang/String;)V");
      c.op(0xb1, "return");
      a.add_method(m, "()V", c);
    }
    out.push_back(finish(a, {{"fx.Plain", 2}, {"java.lang.Object", 1}}, 3, 0));
  }
  {  // fx.Nested$1: anonymous class calling an interface method.
    ClassAssembler a("fx/Nested$1");
    a.add_interface("fx/Api");
    Code c;
    c.op(0x2a, "aload_0");
    a.invokeinterface(c, "fx/Api", "call");
    a.invokestatic(c, "fx/Nested$1", "self");
    c.op(0xb1, "return");
    a.add_method("call", "()V", c);
    a.add_method("self", "()V", ret_code(), ClassAssembler::kStatic);
    out.push_back(finish(a, {{"fx.Api", 1}}, 2, 1));
  }
  {  // Top: default package, static interface method (Java 8 form).
    ClassAssembler a("Top", "java/lang/Object", 61);
    Code c;
    a.invokestatic(c, "fx/Util", "helper");
    a.invokestatic(c, "fx/Api", "create", "()Lfx/Api;", true);
    c.op(0x57, "pop");
    c.op(0xb1, "return");
    a.add_method("main", "()V", c, ClassAssembler::kStatic);
    out.push_back(finish(a, {{"fx.Util", 1}, {"fx.Api", 1}}, 2, 0));
  }
  return out;
}

/// Writes each fixture as `<dir>/<internal name>.class`.
inline void write_fixture_tree(const std::vector<Fixture>& corpus,
                               const std::filesystem::path& dir) {
  for (const auto& f : corpus) {
    std::string rel = f.class_name;
    for (auto& ch : rel)
      if (ch == '.') ch = '/';
    auto path = dir / (rel + ".class");
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(f.bytes.data()),
             static_cast<std::streamsize>(f.bytes.size()));
  }
}

}  // namespace coupling::support
