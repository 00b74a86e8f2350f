#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace apgdiag {

enum class NodeKind {
    Query,
    Plan,
    Operator,
    Tablespace,
    Volume,
    StoragePool,
    Disk,
    Server,
    Hba,
    SwitchPort,
    Switch,
    ControllerPort,
    Controller,
    ExternalWorkload,
};

inline constexpr std::array<NodeKind, 14> kAllNodeKinds = {
    NodeKind::Query,      NodeKind::Plan,        NodeKind::Operator,   NodeKind::Tablespace,
    NodeKind::Volume,     NodeKind::StoragePool, NodeKind::Disk,       NodeKind::Server,
    NodeKind::Hba,        NodeKind::SwitchPort,  NodeKind::Switch,     NodeKind::ControllerPort,
    NodeKind::Controller, NodeKind::ExternalWorkload,
};

enum class Layer { DbLogical, SanLogical, SanPhysical, External };

enum class EdgeKind {
    PlanOf,         // Query -> Plan
    ChildOf,        // child Operator -> parent Operator
    OperatorOf,     // Plan -> root Operator
    Reads,          // Operator -> Tablespace
    MappedTo,       // Tablespace -> Volume
    AllocatedFrom,  // Volume -> StoragePool, StoragePool -> Disk
    HostedOn,       // Operator -> Server
    PathVia,        // Server -> Hba -> SwitchPort -> Switch -> ControllerPort -> Controller -> StoragePool
    SharesWith,     // ExternalWorkload -> Volume | StoragePool
};

inline constexpr std::array<EdgeKind, 9> kAllEdgeKinds = {
    EdgeKind::PlanOf,        EdgeKind::ChildOf,  EdgeKind::OperatorOf,
    EdgeKind::Reads,         EdgeKind::MappedTo, EdgeKind::AllocatedFrom,
    EdgeKind::HostedOn,      EdgeKind::PathVia,  EdgeKind::SharesWith,
};

Layer layer_of(NodeKind kind);

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
std::string_view to_string(Layer layer);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<EdgeKind> parse_edge_kind(std::string_view text);

// True when an edge of `kind` may connect a `source` node to a `target` node.
bool edge_allowed(EdgeKind kind, NodeKind source, NodeKind target);

// Edge kind implied by a topology connection or allocation between two kinds.
std::optional<EdgeKind> path_edge_for(NodeKind source, NodeKind target);
std::optional<EdgeKind> allocation_edge_for(NodeKind logical, NodeKind physical);

}  // namespace apgdiag
