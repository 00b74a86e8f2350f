#include "apgdiag/kinds.hpp"

namespace apgdiag {

Layer layer_of(NodeKind kind) {
    switch (kind) {
        case NodeKind::Query:
        case NodeKind::Plan:
        case NodeKind::Operator:
        case NodeKind::Tablespace:
            return Layer::DbLogical;
        case NodeKind::Volume:
        case NodeKind::StoragePool:
            return Layer::SanLogical;
        case NodeKind::Disk:
        case NodeKind::Server:
        case NodeKind::Hba:
        case NodeKind::SwitchPort:
        case NodeKind::Switch:
        case NodeKind::ControllerPort:
        case NodeKind::Controller:
            return Layer::SanPhysical;
        case NodeKind::ExternalWorkload:
            return Layer::External;
    }
    return Layer::External;
}

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::Query: return "Query";
        case NodeKind::Plan: return "Plan";
        case NodeKind::Operator: return "Operator";
        case NodeKind::Tablespace: return "Tablespace";
        case NodeKind::Volume: return "Volume";
        case NodeKind::StoragePool: return "StoragePool";
        case NodeKind::Disk: return "Disk";
        case NodeKind::Server: return "Server";
        case NodeKind::Hba: return "Hba";
        case NodeKind::SwitchPort: return "SwitchPort";
        case NodeKind::Switch: return "Switch";
        case NodeKind::ControllerPort: return "ControllerPort";
        case NodeKind::Controller: return "Controller";
        case NodeKind::ExternalWorkload: return "ExternalWorkload";
    }
    return "?";
}

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::PlanOf: return "PlanOf";
        case EdgeKind::ChildOf: return "ChildOf";
        case EdgeKind::OperatorOf: return "OperatorOf";
        case EdgeKind::Reads: return "Reads";
        case EdgeKind::MappedTo: return "MappedTo";
        case EdgeKind::AllocatedFrom: return "AllocatedFrom";
        case EdgeKind::HostedOn: return "HostedOn";
        case EdgeKind::PathVia: return "PathVia";
        case EdgeKind::SharesWith: return "SharesWith";
    }
    return "?";
}

std::string_view to_string(Layer layer) {
    switch (layer) {
        case Layer::DbLogical: return "db-logical";
        case Layer::SanLogical: return "san-logical";
        case Layer::SanPhysical: return "san-physical";
        case Layer::External: return "external";
    }
    return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
    for (NodeKind k : kAllNodeKinds) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<EdgeKind> parse_edge_kind(std::string_view text) {
    for (EdgeKind k : kAllEdgeKinds) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<EdgeKind> path_edge_for(NodeKind source, NodeKind target) {
    using K = NodeKind;
    if ((source == K::Server && target == K::Hba) ||
        (source == K::Hba && target == K::SwitchPort) ||
        (source == K::SwitchPort && target == K::Switch) ||
        (source == K::Switch && target == K::ControllerPort) ||
        (source == K::ControllerPort && target == K::Controller) ||
        (source == K::Controller && target == K::StoragePool)) {
        return EdgeKind::PathVia;
    }
    return std::nullopt;
}

std::optional<EdgeKind> allocation_edge_for(NodeKind logical, NodeKind physical) {
    using K = NodeKind;
    if (logical == K::Tablespace && physical == K::Volume) return EdgeKind::MappedTo;
    if ((logical == K::Volume && physical == K::StoragePool) ||
        (logical == K::StoragePool && physical == K::Disk)) {
        return EdgeKind::AllocatedFrom;
    }
    return std::nullopt;
}

bool edge_allowed(EdgeKind kind, NodeKind source, NodeKind target) {
    using K = NodeKind;
    switch (kind) {
        case EdgeKind::PlanOf: return source == K::Query && target == K::Plan;
        case EdgeKind::ChildOf: return source == K::Operator && target == K::Operator;
        case EdgeKind::OperatorOf: return source == K::Plan && target == K::Operator;
        case EdgeKind::Reads: return source == K::Operator && target == K::Tablespace;
        case EdgeKind::MappedTo:
        case EdgeKind::AllocatedFrom: return allocation_edge_for(source, target) == kind;
        case EdgeKind::HostedOn: return source == K::Operator && target == K::Server;
        case EdgeKind::PathVia: return path_edge_for(source, target).has_value();
        case EdgeKind::SharesWith:
            return source == K::ExternalWorkload && (target == K::Volume || target == K::StoragePool);
    }
    return false;
}

}  // namespace apgdiag
