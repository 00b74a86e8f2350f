#include "apgdiag/model.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

#include "apgdiag/error.hpp"

namespace apgdiag {

namespace {

const std::vector<const ApgEdge*> kNoEdges;

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

nlohmann::json canonical_shape(const OperatorRecord& op, std::set<std::string>& seen) {
    if (!seen.insert(op.op_id).second) {
        throw Error(ErrorCode::CyclicPlan, "operator '" + op.op_id + "' appears more than once in the plan tree");
    }
    std::vector<std::string> reads = op.reads;
    std::sort(reads.begin(), reads.end());
    nlohmann::json children = nlohmann::json::array();
    for (const auto& child : op.children) children.push_back(canonical_shape(child, seen));
    return nlohmann::json::array({op.op_kind, reads, children});
}

}  // namespace

std::vector<const OperatorRecord*> flatten_operators(const OperatorRecord& root) {
    std::vector<const OperatorRecord*> out;
    for_each_operator(root, [&](const OperatorRecord& op) { out.push_back(&op); });
    return out;
}

const Component* TopologyDoc::find(const std::string& id) const {
    for (const auto& c : components) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

AnnotatedPlanGraph::AnnotatedPlanGraph(std::string query_id, std::string plan_fingerprint,
                                       std::vector<ApgNode> nodes, std::vector<ApgEdge> edges)
    : query_id_(std::move(query_id)),
      plan_fingerprint_(std::move(plan_fingerprint)),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const ApgNode& a, const ApgNode& b) { return a.id < b.id; });
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.id.empty()) throw Error(ErrorCode::SchemaViolation, "node with empty id");
        for (const auto& [key, value] : n.attrs) {
            if (key.empty()) throw Error(ErrorCode::SchemaViolation, "node '" + n.id + "' has an empty attribute key");
        }
        if (!index_.emplace(n.id, i).second) {
            throw Error(ErrorCode::SchemaViolation, "duplicate node id '" + n.id + "'");
        }
    }
    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
    for (const auto& e : edges_) {
        auto s = index_.find(e.source);
        auto t = index_.find(e.target);
        if (s == index_.end() || t == index_.end()) {
            const std::string& missing = s == index_.end() ? e.source : e.target;
            throw Error(ErrorCode::DanglingConnection,
                        std::string(to_string(e.kind)) + " edge references missing node '" + missing + "'");
        }
        if (!edge_allowed(e.kind, nodes_[s->second].kind, nodes_[t->second].kind)) {
            throw Error(ErrorCode::SchemaViolation,
                        std::string(to_string(e.kind)) + " edge not allowed from " +
                            std::string(to_string(nodes_[s->second].kind)) + " '" + e.source + "' to " +
                            std::string(to_string(nodes_[t->second].kind)) + " '" + e.target + "'");
        }
        out_[s->second].push_back(&e);
        in_[t->second].push_back(&e);
    }
}

const ApgNode* AnnotatedPlanGraph::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

const ApgNode& AnnotatedPlanGraph::node(std::string_view id) const {
    const ApgNode* n = find(id);
    if (n == nullptr) throw Error(ErrorCode::UnknownNode, "no node '" + std::string(id) + "'");
    return *n;
}

const std::vector<const ApgEdge*>& AnnotatedPlanGraph::out_edges(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? kNoEdges : out_[it->second];
}

const std::vector<const ApgEdge*>& AnnotatedPlanGraph::in_edges(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? kNoEdges : in_[it->second];
}

std::vector<std::string> AnnotatedPlanGraph::ids_of_kind(NodeKind kind) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (n.kind == kind) out.push_back(n.id);
    }
    return out;
}

std::string AnnotatedPlanGraph::serialize() const {
    nlohmann::json doc;
    doc["query_id"] = query_id_;
    doc["plan_fingerprint"] = plan_fingerprint_;
    auto& nodes = doc["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"label", n.label}, {"attrs", n.attrs}});
    }
    auto& edges = doc["edges"] = nlohmann::json::array();
    for (const auto& e : edges_) {
        edges.push_back({{"source", e.source}, {"target", e.target}, {"kind", to_string(e.kind)}});
    }
    return doc.dump(2) + "\n";
}

std::vector<std::string> invariant_violations(const AnnotatedPlanGraph& apg) {
    std::vector<std::string> out;
    const auto operators = apg.ids_of_kind(NodeKind::Operator);

    std::map<std::string, std::string> parent_of;
    std::vector<std::string> roots;
    for (const auto& op : operators) {
        int parents = 0;
        for (const auto* e : apg.out_edges(op)) {
            if (e->kind == EdgeKind::ChildOf) {
                ++parents;
                parent_of[op] = e->target;
            }
        }
        if (parents > 1) out.push_back("operator '" + op + "' has more than one parent");
        if (parents == 0) roots.push_back(op);
    }
    if (!operators.empty() && roots.size() != 1) {
        out.push_back("plan tree must have exactly one root operator, found " + std::to_string(roots.size()));
    }
    for (const auto& op : operators) {
        std::set<std::string> seen{op};
        auto it = parent_of.find(op);
        while (it != parent_of.end()) {
            if (!seen.insert(it->second).second) {
                out.push_back("ChildOf cycle through operator '" + op + "'");
                break;
            }
            it = parent_of.find(it->second);
        }
    }

    for (const auto& op : operators) {
        std::vector<std::string> frontier;
        for (const auto* e : apg.out_edges(op)) {
            if (e->kind == EdgeKind::Reads) frontier.push_back(e->target);
        }
        if (frontier.empty()) continue;
        std::set<std::string> seen(frontier.begin(), frontier.end());
        bool reaches_disk = false;
        while (!frontier.empty() && !reaches_disk) {
            std::string id = frontier.back();
            frontier.pop_back();
            if (apg.node(id).kind == NodeKind::Disk) reaches_disk = true;
            for (const auto* e : apg.out_edges(id)) {
                if ((e->kind == EdgeKind::MappedTo || e->kind == EdgeKind::AllocatedFrom ||
                     e->kind == EdgeKind::PathVia) &&
                    seen.insert(e->target).second) {
                    frontier.push_back(e->target);
                }
            }
        }
        if (!reaches_disk) out.push_back("operator '" + op + "' reads storage that reaches no Disk");
    }
    return out;
}

std::string query_node_id(const std::string& query_id) { return "query:" + query_id; }
std::string plan_node_id(const std::string& fingerprint) { return "plan:" + fingerprint; }

std::string plan_fingerprint(const OperatorRecord& root) {
    std::set<std::string> seen;
    return hex64(fnv1a64(canonical_shape(root, seen).dump()));
}

std::string plan_fingerprint(const PlanSnapshot& plan) { return plan_fingerprint(plan.root); }

AnnotatedPlanGraph build_apg(const PlanSnapshot& plan, const TopologyDoc& topology) {
    const std::string fingerprint = plan_fingerprint(plan);

    std::map<std::string, const Component*> by_id;
    for (const auto& c : topology.components) {
        if (!by_id.emplace(c.id, &c).second) {
            throw Error(ErrorCode::SchemaViolation, "duplicate component id '" + c.id + "'");
        }
    }
    auto require = [&](const std::string& id, const char* what) -> const Component& {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::DanglingConnection, std::string(what) + " references missing component '" + id + "'");
        }
        return *it->second;
    };

    std::vector<ApgNode> nodes;
    std::vector<ApgEdge> edges;
    for (const auto& c : topology.components) {
        if (layer_of(c.kind) == Layer::DbLogical && c.kind != NodeKind::Tablespace) {
            throw Error(ErrorCode::SchemaViolation, "topology component '" + c.id + "' has plan-level kind " +
                                                        std::string(to_string(c.kind)));
        }
        nodes.push_back({c.id, c.kind, c.attrs, c.id});
    }
    for (const auto& conn : topology.connections) {
        const auto& from = require(conn.from, "connection");
        const auto& to = require(conn.to, "connection");
        auto kind = path_edge_for(from.kind, to.kind);
        if (!kind) {
            throw Error(ErrorCode::SchemaViolation, "connection " + conn.from + " -> " + conn.to + " joins " +
                                                        std::string(to_string(from.kind)) + " to " +
                                                        std::string(to_string(to.kind)));
        }
        edges.push_back({conn.from, conn.to, *kind});
    }
    for (const auto& alloc : topology.allocations) {
        const auto& logical = require(alloc.logical, "allocation");
        const auto& physical = require(alloc.physical, "allocation");
        auto kind = allocation_edge_for(logical.kind, physical.kind);
        if (!kind) {
            throw Error(ErrorCode::SchemaViolation, "allocation " + alloc.logical + " -> " + alloc.physical +
                                                        " maps " + std::string(to_string(logical.kind)) + " to " +
                                                        std::string(to_string(physical.kind)));
        }
        edges.push_back({alloc.logical, alloc.physical, *kind});
    }
    for (const auto& share : topology.sharing) {
        require(share.workload, "sharing");
        require(share.target, "sharing");
        edges.push_back({share.workload, share.target, EdgeKind::SharesWith});
    }

    std::string host = plan.host;
    if (host.empty()) {
        for (const auto& c : topology.components) {
            if (c.kind != NodeKind::Server) continue;
            if (!host.empty()) {
                throw Error(ErrorCode::SchemaViolation,
                            "plan for query '" + plan.query_id + "' names no host and the topology has several servers");
            }
            host = c.id;
        }
        if (host.empty()) throw Error(ErrorCode::SchemaViolation, "topology declares no Server to host the query");
    } else if (require(host, "plan host").kind != NodeKind::Server) {
        throw Error(ErrorCode::SchemaViolation, "plan host '" + host + "' is not a Server");
    }

    const std::string query_node = query_node_id(plan.query_id);
    const std::string plan_node = plan_node_id(fingerprint);
    nodes.push_back({query_node, NodeKind::Query, {}, plan.query_id});
    nodes.push_back({plan_node, NodeKind::Plan, {{"fingerprint", fingerprint}}, fingerprint});
    edges.push_back({query_node, plan_node, EdgeKind::PlanOf});
    edges.push_back({plan_node, plan.root.op_id, EdgeKind::OperatorOf});

    std::function<void(const OperatorRecord&, const OperatorRecord*)> add_operator =
        [&](const OperatorRecord& op, const OperatorRecord* parent) {
            if (by_id.count(op.op_id) != 0 || op.op_id == query_node || op.op_id == plan_node) {
                throw Error(ErrorCode::SchemaViolation, "operator id '" + op.op_id + "' collides with another node");
            }
            nodes.push_back({op.op_id, NodeKind::Operator, {{"op_kind", op.op_kind}}, op.op_kind});
            if (parent != nullptr) edges.push_back({op.op_id, parent->op_id, EdgeKind::ChildOf});
            edges.push_back({op.op_id, host, EdgeKind::HostedOn});
            for (const auto& ts : op.reads) {
                auto it = by_id.find(ts);
                if (it == by_id.end() || it->second->kind != NodeKind::Tablespace) {
                    throw Error(ErrorCode::UnknownTablespace,
                                "operator '" + op.op_id + "' reads '" + ts + "', which is not a tablespace in the topology");
                }
                edges.push_back({op.op_id, ts, EdgeKind::Reads});
            }
            for (const auto& child : op.children) add_operator(child, &op);
        };
    add_operator(plan.root, nullptr);

    AnnotatedPlanGraph apg(plan.query_id, fingerprint, std::move(nodes), std::move(edges));
    auto violations = invariant_violations(apg);
    if (!violations.empty()) {
        throw Error(ErrorCode::SchemaViolation, violations.front());
    }
    return apg;
}

NodeSet dependency_closure(const AnnotatedPlanGraph& apg, const std::string& operator_id) {
    const ApgNode& op = apg.node(operator_id);
    if (op.kind != NodeKind::Operator) {
        throw Error(ErrorCode::WrongKind, "'" + operator_id + "' is a " + std::string(to_string(op.kind)) +
                                              ", not an Operator");
    }

    NodeSet closure;
    std::vector<std::string> hosts;
    std::deque<std::string> queue;
    for (const auto* e : apg.out_edges(operator_id)) {
        if (e->kind == EdgeKind::HostedOn) {
            hosts.push_back(e->target);
            closure.insert(e->target);
        } else if (e->kind == EdgeKind::Reads && closure.insert(e->target).second) {
            queue.push_back(e->target);
        }
    }
    NodeSet storage;
    while (!queue.empty()) {
        std::string id = queue.front();
        queue.pop_front();
        storage.insert(id);
        for (const auto* e : apg.out_edges(id)) {
            if ((e->kind == EdgeKind::MappedTo || e->kind == EdgeKind::AllocatedFrom) &&
                closure.insert(e->target).second) {
                queue.push_back(e->target);
            }
        }
    }
    if (storage.empty() || hosts.empty()) return closure;

    // Forward from the host(s) along PathVia, backward from the pools read.
    NodeSet forward;
    for (const auto& h : hosts) {
        forward.insert(h);
        queue.push_back(h);
    }
    while (!queue.empty()) {
        std::string id = queue.front();
        queue.pop_front();
        for (const auto* e : apg.out_edges(id)) {
            if (e->kind == EdgeKind::PathVia && forward.insert(e->target).second) queue.push_back(e->target);
        }
    }
    NodeSet backward;
    for (const auto& id : storage) {
        if (apg.node(id).kind == NodeKind::StoragePool) {
            backward.insert(id);
            queue.push_back(id);
        }
    }
    while (!queue.empty()) {
        std::string id = queue.front();
        queue.pop_front();
        for (const auto* e : apg.in_edges(id)) {
            if (e->kind == EdgeKind::PathVia && backward.insert(e->source).second) queue.push_back(e->source);
        }
    }
    for (const auto& id : forward) {
        if (backward.count(id) != 0) closure.insert(id);
    }
    return closure;
}

}  // namespace apgdiag
