#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "apgdiag/documents.hpp"
#include "apgdiag/kinds.hpp"

namespace apgdiag {

struct ApgNode {
    std::string id;
    NodeKind kind = NodeKind::Disk;
    AttrMap attrs;
    std::string label;
};

struct ApgEdge {
    std::string source;
    std::string target;
    EdgeKind kind = EdgeKind::PathVia;

    auto operator<=>(const ApgEdge&) const = default;
};

using NodeSet = std::set<std::string>;

// Annotated Plan Graph: query, plan and operators joined to the logical and
// physical SAN entities they depend on. Immutable once constructed.
//
// The constructor enforces the structural rules (unique ids, existing
// endpoints, edge kind signatures). The plan-level rules checked by
// invariant_violations() are enforced by build_apg().
class AnnotatedPlanGraph {
public:
    AnnotatedPlanGraph(std::string query_id, std::string plan_fingerprint,
                       std::vector<ApgNode> nodes, std::vector<ApgEdge> edges);

    const std::vector<ApgNode>& nodes() const { return nodes_; }
    const std::vector<ApgEdge>& edges() const { return edges_; }
    const std::string& query_id() const { return query_id_; }
    const std::string& plan_fingerprint() const { return plan_fingerprint_; }

    const ApgNode* find(std::string_view id) const;
    const ApgNode& node(std::string_view id) const;

    const std::vector<const ApgEdge*>& out_edges(std::string_view id) const;
    const std::vector<const ApgEdge*>& in_edges(std::string_view id) const;

    std::vector<std::string> ids_of_kind(NodeKind kind) const;

    // Canonical JSON text; identical graphs serialize byte for byte.
    std::string serialize() const;

private:
    std::string query_id_;
    std::string plan_fingerprint_;
    std::vector<ApgNode> nodes_;
    std::vector<ApgEdge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<const ApgEdge*>> out_;
    std::vector<std::vector<const ApgEdge*>> in_;
};

// Violations of the plan-level graph rules: ChildOf forms a single rooted
// tree and every reading operator reaches at least one Disk.
std::vector<std::string> invariant_violations(const AnnotatedPlanGraph& apg);

std::string query_node_id(const std::string& query_id);
std::string plan_node_id(const std::string& fingerprint);

AnnotatedPlanGraph build_apg(const PlanSnapshot& plan, const TopologyDoc& topology);

// Nodes an operator depends on: its tablespaces and everything they are
// allocated from, its host server and, when it reads storage, the PathVia
// nodes between that server and the pools it reads from.
NodeSet dependency_closure(const AnnotatedPlanGraph& apg, const std::string& operator_id);

// Stable hash of the plan structure (operator kinds, child order, read
// objects). Timings, row counts and operator ids do not participate.
std::string plan_fingerprint(const PlanSnapshot& plan);
std::string plan_fingerprint(const OperatorRecord& root);

}  // namespace apgdiag
