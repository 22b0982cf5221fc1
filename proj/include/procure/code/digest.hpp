#pragma once

#include <map>
#include <string>
#include <string_view>

#include "procure/code/program.hpp"

namespace procure::code {

struct StructuralDigest {
  std::string raw_hash;
  std::string ast_hash;
  std::string alpha_hash;
};

std::string sha256_hex(std::string_view data);

/// Strips trailing whitespace per line, folds CRLF to LF and drops trailing
/// blank lines.
std::string normalize_whitespace(std::string_view source);

std::string raw_hash(std::string_view source);

StructuralDigest structural_digest(const SubjectProgram& program);

/// Canonical S-expression rendering of AST nodes. In alpha mode every
/// resolved symbol is printed as v<k>, numbered by first occurrence across
/// all calls made on the same serializer.
class Serializer {
 public:
  Serializer(const SubjectProgram& program, bool alpha) : program_(program), alpha_(alpha) {}

  std::string expr(const Expr& e);
  std::string stmt(const Stmt& s);
  /// Compound statements render their header parts only.
  std::string header(const Stmt& s);
  std::string module();

 private:
  void put_expr(std::string& out, const Expr& e);
  void put_stmt(std::string& out, const Stmt& s, bool header_only);
  void put_name(std::string& out, const std::string& literal, int symbol);

  const SubjectProgram& program_;
  bool alpha_;
  std::map<int, int> numbering_;
};

}  // namespace procure::code
