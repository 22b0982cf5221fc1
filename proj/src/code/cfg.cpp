#include "procure/code/cfg.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "procure/code/digest.hpp"

namespace procure::code {
namespace {

struct Dangling {
  int from;
  BranchLabel label;
};
using Frontier = std::vector<Dangling>;

struct LoopContext {
  int head;
  Frontier breaks;
};

class Builder {
 public:
  explicit Builder(const SubjectProgram& program) : serializer_(program, true) {
    add_node(CfgNodeKind::Entry, "");
    add_node(CfgNodeKind::Exit, "");
  }

  Cfg run(const std::vector<Stmt>& body) {
    Frontier f{{cfg_.entry, BranchLabel::Fallthrough}};
    f = suite(body, std::move(f));
    connect(f, cfg_.exit);
    return std::move(cfg_);
  }

 private:
  int add_node(CfgNodeKind kind, std::string label) {
    CfgNode n;
    n.id = static_cast<int>(cfg_.nodes.size());
    n.kind = kind;
    n.label = std::move(label);
    cfg_.nodes.push_back(std::move(n));
    return cfg_.nodes.back().id;
  }

  void connect(const Frontier& f, int to, bool loop_back = false) {
    for (const Dangling& d : f) {
      BranchLabel label = d.label;
      if (loop_back && label == BranchLabel::Fallthrough) label = BranchLabel::LoopBack;
      cfg_.edges.push_back(CfgEdge{d.from, to, label});
    }
  }

  // `open` is the block currently accepting straight-line statements.
  Frontier suite(const std::vector<Stmt>& body, Frontier f) {
    int open = -1;
    for (const Stmt& s : body) {
      if (f.empty()) break;  // the rest of the suite is unreachable
      switch (s.kind) {
        case StmtKind::If:
          open = -1;
          f = if_stmt(s, std::move(f));
          continue;
        case StmtKind::While:
        case StmtKind::For:
          open = -1;
          f = loop(s, std::move(f));
          continue;
        default:
          break;
      }
      if (open < 0) {
        open = add_node(CfgNodeKind::Block, "");
        connect(f, open);
        f = {{open, BranchLabel::Fallthrough}};
      }
      CfgNode& node = cfg_.nodes[static_cast<std::size_t>(open)];
      node.label += serializer_.stmt(s);
      node.statements.push_back(s.index);
      switch (s.kind) {
        case StmtKind::Return:
        case StmtKind::Raise:
          cfg_.edges.push_back(CfgEdge{open, cfg_.exit, BranchLabel::Fallthrough});
          f.clear();
          break;
        case StmtKind::Break:
          loops_.back().breaks.push_back({open, BranchLabel::Fallthrough});
          f.clear();
          break;
        case StmtKind::Continue:
          cfg_.edges.push_back(CfgEdge{open, loops_.back().head, BranchLabel::LoopBack});
          f.clear();
          break;
        default:
          break;
      }
    }
    return f;
  }

  Frontier if_stmt(const Stmt& s, Frontier f) {
    int node = add_node(CfgNodeKind::If, serializer_.header(s));
    cfg_.nodes[static_cast<std::size_t>(node)].statements.push_back(s.index);
    connect(f, node);
    Frontier out = suite(s.body, {{node, BranchLabel::True}});
    Frontier other = s.orelse.empty() ? Frontier{{node, BranchLabel::False}}
                                      : suite(s.orelse, {{node, BranchLabel::False}});
    out.insert(out.end(), other.begin(), other.end());
    return out;
  }

  Frontier loop(const Stmt& s, Frontier f) {
    CfgNodeKind kind = s.kind == StmtKind::While ? CfgNodeKind::While : CfgNodeKind::For;
    int head = add_node(kind, serializer_.header(s));
    cfg_.nodes[static_cast<std::size_t>(head)].statements.push_back(s.index);
    connect(f, head);
    loops_.push_back(LoopContext{head, {}});
    Frontier body_end = suite(s.body, {{head, BranchLabel::True}});
    connect(body_end, head, true);
    Frontier breaks = std::move(loops_.back().breaks);
    loops_.pop_back();
    Frontier out = s.orelse.empty() ? Frontier{{head, BranchLabel::False}}
                                    : suite(s.orelse, {{head, BranchLabel::False}});
    out.insert(out.end(), breaks.begin(), breaks.end());
    return out;
  }

  Serializer serializer_;
  Cfg cfg_;
  std::vector<LoopContext> loops_;
};

}  // namespace

std::vector<CfgEdge> Cfg::out_edges(int node) const {
  std::vector<CfgEdge> out;
  for (const CfgEdge& e : edges) {
    if (e.from == node) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const CfgEdge& a, const CfgEdge& b) { return a.label < b.label; });
  return out;
}

std::string Cfg::canonical() const {
  // Out-edge labels are unique per node, so a DFS that follows edges in label
  // order visits nodes in an order determined by the graph alone.
  std::map<int, int> order;
  std::vector<int> visit;
  std::vector<int> stack{entry};
  order[exit] = -1;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (order.count(n) != 0 && n != exit) continue;
    if (n == exit) continue;
    order[n] = static_cast<int>(visit.size());
    visit.push_back(n);
    auto out = out_edges(n);
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
      if (order.count(it->to) == 0) stack.push_back(it->to);
    }
  }
  std::string enc;
  for (int n : visit) {
    const CfgNode& node = nodes[static_cast<std::size_t>(n)];
    enc += std::to_string(order[n]);
    enc += '|';
    enc += to_string(node.kind);
    enc += '|';
    enc += std::to_string(node.label.size());
    enc += ':';
    enc += node.label;
    for (const CfgEdge& e : out_edges(n)) {
      enc += '>';
      enc += to_string(e.label);
      enc += '=';
      enc += e.to == exit ? "X" : std::to_string(order[e.to]);
    }
    enc += '\n';
  }
  return enc;
}

Cfg build_cfg(const SubjectProgram& program) {
  program.require_supported();
  return Builder(program).run(program.entry_function().body);
}

bool cfg_equivalent(const Cfg& a, const Cfg& b) { return a.canonical() == b.canonical(); }

std::string_view to_string(CfgNodeKind kind) noexcept {
  switch (kind) {
    case CfgNodeKind::Entry: return "entry";
    case CfgNodeKind::Exit: return "exit";
    case CfgNodeKind::Block: return "block";
    case CfgNodeKind::If: return "if";
    case CfgNodeKind::While: return "while";
    case CfgNodeKind::For: return "for";
  }
  return "?";
}

std::string_view to_string(BranchLabel label) noexcept {
  switch (label) {
    case BranchLabel::Fallthrough: return "fallthrough";
    case BranchLabel::True: return "true";
    case BranchLabel::False: return "false";
    case BranchLabel::LoopBack: return "loop-back";
  }
  return "?";
}

}  // namespace procure::code
