#include "procure/code/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

namespace procure::code {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string normalize_whitespace(std::string_view source) {
  std::string out;
  out.reserve(source.size());
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t nl = source.find('\n', pos);
    std::string_view line = source.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::size_t keep = line.find_last_not_of(" \t\r\f\v");
    out.append(line.substr(0, keep == std::string_view::npos ? 0 : keep + 1));
    if (nl == std::string_view::npos) break;
    out.push_back('\n');
    pos = nl + 1;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::string raw_hash(std::string_view source) { return sha256_hex(normalize_whitespace(source)); }

StructuralDigest structural_digest(const SubjectProgram& program) {
  StructuralDigest d;
  d.raw_hash = raw_hash(program.source());
  d.ast_hash = sha256_hex(Serializer(program, false).module());
  d.alpha_hash = sha256_hex(Serializer(program, true).module());
  return d;
}

namespace {

void put_atom(std::string& out, std::string_view text) {
  out += std::to_string(text.size());
  out += ':';
  out += text;
}

char ctx_code(NameCtx ctx) {
  switch (ctx) {
    case NameCtx::Load: return 'L';
    case NameCtx::Store: return 'S';
    case NameCtx::Del: return 'D';
  }
  return '?';
}

}  // namespace

void Serializer::put_name(std::string& out, const std::string& literal, int symbol) {
  if (alpha_ && symbol >= 0) {
    auto [it, inserted] = numbering_.emplace(symbol, static_cast<int>(numbering_.size()));
    put_atom(out, "v" + std::to_string(it->second));
  } else {
    put_atom(out, literal);
  }
}

void Serializer::put_expr(std::string& out, const Expr& e) {
  out += '(';
  out += to_string(e.kind);
  out += ' ';
  switch (e.kind) {
    case ExprKind::Name:
      out += ctx_code(e.ctx);
      put_name(out, e.value, e.symbol);
      break;
    case ExprKind::Param:
      out += static_cast<char>('0' + static_cast<int>(e.param));
      put_name(out, e.value, e.symbol);
      break;
    case ExprKind::Constant:
    case ExprKind::FString:
      out += static_cast<char>('0' + static_cast<int>(e.constant));
      put_atom(out, e.value);
      break;
    case ExprKind::Tuple:
    case ExprKind::List:
    case ExprKind::Starred:
    case ExprKind::Attribute:
    case ExprKind::Subscript:
      out += ctx_code(e.ctx);
      if (e.kind == ExprKind::Attribute) put_atom(out, e.value);
      break;
    default:
      put_atom(out, e.value);
      break;
  }
  for (const Expr& k : e.kids) put_expr(out, k);
  out += ')';
}

void Serializer::put_stmt(std::string& out, const Stmt& s, bool header_only) {
  out += '[';
  out += to_string(s.kind);
  out += s.is_async ? " async " : " ";
  put_atom(out, s.name);
  for (const Expr& d : s.decorators) put_expr(out, d);
  for (const Expr& e : s.exprs) put_expr(out, e);
  if (!header_only) {
    for (const auto* suite : {&s.body, &s.orelse, &s.handlers, &s.finalbody}) {
      out += '{';
      for (const Stmt& c : *suite) put_stmt(out, c, false);
      out += '}';
    }
  }
  out += ']';
}

std::string Serializer::expr(const Expr& e) {
  std::string out;
  put_expr(out, e);
  return out;
}

std::string Serializer::stmt(const Stmt& s) {
  std::string out;
  put_stmt(out, s, false);
  return out;
}

std::string Serializer::header(const Stmt& s) {
  std::string out;
  put_stmt(out, s, is_compound(s.kind));
  return out;
}

std::string Serializer::module() {
  std::string out;
  for (const Stmt& s : program_.module()) put_stmt(out, s, false);
  return out;
}

}  // namespace procure::code
