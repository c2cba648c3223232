#pragma once

// Plain-text formats for datasets, experts, networks and bundles.
//
// Dataset CSV:
//   # lta-dataset v1 task=<t> classes=<K> features=<d> feedback=<m>
//     feedback_mode=<mode> machine=<i,j,..> expert=<i,..> conditions=<c>
//   x0,..,x{d-1},y,h0,..,h{m-1},split,p0,..,p{c-1},weight
// The first line is a single comment line; `split` is train|cal|test; the
// p columns (consensus) are present only when conditions > 0.
//
// Networks, experts and bundles are whitespace-tokenized text; see the
// write_* functions for layouts. Doubles are written in shortest
// round-trip form, so write -> read -> write is byte-identical.

#include <iosfwd>
#include <string>

#include "lta/datagen.h"
#include "lta/expert_sim.h"
#include "lta/model_bundle.h"
#include "lta/nn_core.h"

namespace lta {

std::string format_double(double v);
double parse_double(const std::string& token);

void write_dataset(std::ostream& out, const TaskDataset& ds);
TaskDataset read_dataset(std::istream& in);

void write_net(std::ostream& out, const DenseNet& net);
DenseNet read_net(std::istream& in);

void write_expert(std::ostream& out, const ExpertModel& expert);
ExpertModel read_expert(std::istream& in);

void write_bundle(std::ostream& out, const ModelBundle& bundle);
ModelBundle read_bundle(std::istream& in);

// File helpers; throw DataError when the path cannot be opened.
void save_dataset(const std::string& path, const TaskDataset& ds);
TaskDataset load_dataset(const std::string& path);
void save_bundle(const std::string& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::string& path);

}  // namespace lta
