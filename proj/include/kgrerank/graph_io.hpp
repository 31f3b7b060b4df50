// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <iosfwd>
#include <string>

#include "kgrerank/graph.hpp"

namespace kgrerank {

// Flat-file export of a graph:
//   triples:  <source-id>\t<predicate>\t<target-id>
//   manifest: <id>\t<kind>\t<label>
// Both are sorted lexicographically (by id; triples by source id, then
// predicate, then target id) so the output is byte-stable.

void write_triples(std::ostream& out, const CatalogGraph& g);
void write_node_manifest(std::ostream& out, const CatalogGraph& g);

/// Export restricted to the nodes and edges of a profile subgraph.
void write_triples(std::ostream& out, const CatalogGraph& catalog, const ProfileSubgraph& sg);
void write_node_manifest(std::ostream& out, const CatalogGraph& catalog, const ProfileSubgraph& sg);

/// Reads back an export. Every triple endpoint must appear in the manifest.
CatalogGraph read_graph_export(std::istream& manifest, std::istream& triples);

}  // namespace kgrerank
