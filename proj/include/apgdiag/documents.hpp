#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "apgdiag/kinds.hpp"

namespace apgdiag {

// Configuration snapshot of a component (speed, size, zone id, ...).
using AttrMap = std::map<std::string, std::string>;

struct Component {
    std::string id;
    NodeKind kind = NodeKind::Disk;
    AttrMap attrs;
};

// Physical link; direction follows the I/O path from server towards storage.
struct Connection {
    std::string from;
    std::string to;
};

// Logical -> physical mapping: tablespace->volume, volume->pool, pool->disk.
struct Allocation {
    std::string logical;
    std::string physical;
};

struct Sharing {
    std::string workload;
    std::string target;
};

struct TopologyDoc {
    std::vector<Component> components;
    std::vector<Connection> connections;
    std::vector<Allocation> allocations;
    std::vector<Sharing> sharing;

    const Component* find(const std::string& id) const;
};

struct OperatorRecord {
    std::string op_id;
    std::string op_kind;
    std::vector<std::string> reads;
    double elapsed_s = 0.0;
    std::vector<OperatorRecord> children;
};

struct PlanSnapshot {
    std::string query_id;
    std::string run_id;
    std::int64_t started_at = 0;
    double total_elapsed_s = 0.0;
    // Server running the query; empty means "the only Server in the topology".
    std::string host;
    OperatorRecord root;
};

// Pre-order walk over the plan tree.
template <typename F>
void for_each_operator(const OperatorRecord& op, F&& fn) {
    fn(op);
    for (const auto& child : op.children) for_each_operator(child, fn);
}

std::vector<const OperatorRecord*> flatten_operators(const OperatorRecord& root);

}  // namespace apgdiag
