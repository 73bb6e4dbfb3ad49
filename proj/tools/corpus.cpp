#include "corpus.hpp"

#include <numeric>
#include <stdexcept>

namespace onramp::tools {

namespace {

SynthConfig make(double ramp, double main, double duration, int id) {
  SynthConfig c;
  c.ramp_rate = ramp;
  c.main_rate = main;
  c.duration = duration;
  // zone transit at the downstream free speed keeps the merge transparent
  // in free flow; the default would brake every car by a twentieth
  c.merge_delay = 20.0 / (75.6 / 3.6);
  c.seed = 1000 + static_cast<std::uint64_t>(id);
  return c;
}

SynthConfig modulated(double ramp, double main, double duration, double amp,
                      double period, int id) {
  SynthConfig c = make(ramp, main, duration, id);
  c.rate_amplitude = amp;
  c.rate_period = period;
  return c;
}

// Speed-capped closure: the road ahead of the junction moves as a slow convoy,
// so the junction stays supply-limited while fluxes keep flowing.
SynthConfig crawl(double ramp, double main, double duration, double start,
                  double speed, int id) {
  SynthConfig c = make(ramp, main, duration, id);
  c.block_start = start;
  c.block_duration = duration - start;
  c.block_speed = speed;
  return c;
}

// Full closure: standing queues compact to the stagnation spacing on all
// three roads, anchoring the jam-density end of the diagrams.
SynthConfig closure(double ramp, double main, double duration, double start,
                    int id) {
  SynthConfig c = make(ramp, main, duration, id);
  c.block_start = start;
  c.block_duration = duration - start;
  return c;
}

SynthConfig metered(double ramp, double main, double duration, double cap,
                    double priority, int id) {
  SynthConfig c = make(ramp, main, duration, id);
  c.junction_capacity = cap;
  c.ramp_priority = priority;
  return c;
}

}  // namespace

SynthConfig corpus_config(int id) {
  switch (id) {
    // Training split.
    case 1:  return make(0.02, 0.06, 300, id);
    case 4:  return make(0.025, 0.09, 300, id);
    case 10: return make(0.10, 1.20, 350, id);
    case 11: return make(0.03, 1.70, 400, id);
    case 16: return crawl(0.58, 1.85, 400, 0, 6.0, id);
    case 19: return crawl(0.58, 1.90, 400, 0, 6.0, id);
    case 20: return make(0.50, 0.45, 400, id);
    case 30: return closure(0.45, 1.20, 300, 10, id);

    // Test split.
    case 6:  return make(0.03, 0.10, 300, id);
    case 8:  return make(0.09, 1.10, 320, id);
    case 14: return make(0.12, 0.45, 320, id);
    case 15: return crawl(0.55, 1.82, 380, 0, 6.0, id);
    case 21: return crawl(0.57, 1.88, 380, 0, 6.0, id);
    case 22: return closure(0.42, 1.18, 280, 10, id);
    case 24: return make(0.45, 0.50, 320, id);
    case 26: return modulated(0.05, 0.40, 350, 0.5, 90, id);

    // Application split.
    case 2:  return make(0.04, 0.20, 300, id);
    case 3:  return modulated(0.06, 0.35, 320, 0.6, 75, id);
    case 5:  return make(0.05, 0.25, 280, id);
    case 7:  return modulated(0.04, 0.30, 300, 0.5, 60, id);
    case 9:  return make(0.08, 0.95, 300, id);
    case 12: return modulated(0.05, 0.28, 330, 0.7, 110, id);
    case 13: return make(0.045, 0.22, 310, id);
    case 17: return metered(0.45, 1.50, 300, 0.55, 0.30, id);
    case 18: return modulated(0.05, 0.32, 300, 0.4, 85, id);
    case 23: return crawl(0.56, 1.84, 370, 0, 6.0, id);
    case 25: return make(0.035, 0.18, 290, id);
    case 27: return modulated(0.07, 0.80, 320, 0.5, 100, id);
    case 28: return metered(0.40, 1.45, 310, 0.60, 0.35, id);
    case 29: return make(0.05, 0.30, 300, id);
    case 31: return closure(0.40, 1.12, 270, 12, id);
    default:
      throw std::invalid_argument("corpus dataset id out of range: " +
                                  std::to_string(id));
  }
}

std::vector<int> corpus_ids() {
  std::vector<int> ids(kCorpusSize);
  std::iota(ids.begin(), ids.end(), 1);
  return ids;
}

}  // namespace onramp::tools
