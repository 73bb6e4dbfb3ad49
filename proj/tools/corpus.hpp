#pragma once

#include <vector>

#include "onramp/synth.hpp"

namespace onramp::tools {

// The default synthetic corpus: 31 datasets covering free flow, dense but
// uncongested flow, slow-moving downstream congestion (speed-capped closure
// episodes), full closures with standing queues, and metered-merge stop-and-go.
// Ids, splits and per-id configurations are fixed so every pipeline stage is
// reproducible from the dataset id alone.
SynthConfig corpus_config(int id);

inline constexpr int kCorpusSize = 31;

std::vector<int> corpus_ids();

}  // namespace onramp::tools
