#ifndef REX_SYNTH_HPP
#define REX_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>

namespace rex {

// Desk-scale stand-in for a patent corpus: multi-paragraph recipe spans with
// known gold annotations embedded in boilerplate filler.
struct SynthProfile {
  std::size_t doc_count = 20;
  std::size_t paragraphs_per_doc = 60;  // per-doc counts vary by +-5
  std::size_t reactions_per_doc = 5;
  // probability that a reaction's closing paragraph carries a property tail
  // outside the gold span (the boundary-noise phenomenon)
  double property_tail_rate = 0.3;
};

struct SynthSummary {
  std::size_t doc_count = 0;
  std::size_t paragraph_count = 0;
  std::size_t reaction_count = 0;
  std::size_t property_tail_count = 0;
  std::map<std::size_t, std::size_t> reaction_length_hist;
};

// Writes doc_NNN.txt / doc_NNN.ann pairs plus lexicon.dic and profile.kv
// into out_dir. Byte-deterministic in (profile, seed). ASCII only.
SynthSummary generate_corpus(const SynthProfile& profile, std::uint64_t seed,
                             const std::string& out_dir);

}  // namespace rex

#endif  // REX_SYNTH_HPP
