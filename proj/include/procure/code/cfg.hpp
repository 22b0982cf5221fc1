#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "procure/code/program.hpp"

namespace procure::code {

enum class CfgNodeKind { Entry, Exit, Block, If, While, For };
enum class BranchLabel { Fallthrough, True, False, LoopBack };

struct CfgNode {
  int id = 0;
  CfgNodeKind kind = CfgNodeKind::Block;
  std::string label;            // alpha-renamed statement sequence or header
  std::vector<int> statements;  // statement indices covered by the node
};

struct CfgEdge {
  int from = 0;
  int to = 0;
  BranchLabel label = BranchLabel::Fallthrough;
};

/// Control-flow graph of the entry function. Unreachable statements are not
/// represented.
struct Cfg {
  std::vector<CfgNode> nodes;
  std::vector<CfgEdge> edges;
  int entry = 0;
  int exit = 1;

  std::vector<CfgEdge> out_edges(int node) const;
  /// Encoding that is equal for two graphs exactly when they are isomorphic
  /// with matching node kinds, labels and edge labels.
  std::string canonical() const;
};

/// Throws UnsupportedConstruct for programs outside the modelled subset.
Cfg build_cfg(const SubjectProgram& program);

bool cfg_equivalent(const Cfg& a, const Cfg& b);

std::string_view to_string(CfgNodeKind kind) noexcept;
std::string_view to_string(BranchLabel label) noexcept;

}  // namespace procure::code
