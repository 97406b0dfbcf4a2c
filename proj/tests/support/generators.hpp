#pragma once

#include <random>
#include <vector>

#include "blockweave/annotation.hpp"
#include "blockweave/design.hpp"
#include "blockweave/engine.hpp"
#include "blockweave/library.hpp"

namespace bw::testing {

// Grammar-generated annotation covering every sigil and voltage form.
Annotation random_annotation(std::mt19937& rng);

struct OpLimits {
  std::size_t max_instances = 60;
  std::size_t max_edges = 120;
};

// A random mutation for the engine's current state. Most ops are valid;
// some are deliberately not (bad parent, mismatched ports, occupied mats).
Op random_op(const Engine& engine, std::mt19937& rng, const OpLimits& limits = {});

// Power roots, regulators, computes and peripherals with same-protocol
// edges drawn at random. Placements are set for every instance.
Design synthetic_design(const Library& library, std::size_t instances, std::size_t edges, unsigned seed);

// The op sequence that builds `design` on an empty engine: instances
// parent-first, then board, placements and edges.
std::vector<Op> design_to_ops(const Design& design);

// Every chain of mat parents ends at a POWER instance without revisiting a node.
bool forest_ok(const Design& design, const Library& library);

// Subjects of a diagnostic resolve to an existing instance, port or edge.
bool subject_resolves(const Diagnostic& d, const Design& design, const Library& library);

}  // namespace bw::testing
