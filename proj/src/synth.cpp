#include "rex/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "rex/common.hpp"
#include "rex/corpus.hpp"

namespace rex {

namespace {

const std::vector<std::string> kLocants = {"2", "3", "4", "2,4", "3,5", "2,6"};
const std::vector<std::string> kStems = {
    "methyl", "ethyl",   "chloro",  "bromo", "nitro",
    "amino",  "hydroxy", "methoxy", "fluoro"};
const std::vector<std::string> kBases = {
    "benzaldehyde", "phenol",    "aniline",      "toluidine", "pyridine",
    "quinoline",    "benzamide", "acetophenone", "indole"};
const std::vector<std::string> kSolvents = {
    "ethanol", "methanol", "toluene", "acetonitrile", "cyclohexane", "dioxane"};
const std::vector<std::string> kFormulas = {
    "NaCl", "K2CO3", "MgSO4", "NaOH", "NaHCO3", "Na2SO4", "CuSO4"};
const std::vector<std::string> kColors = {"white", "yellow", "orange",
                                          "colorless", "beige"};

std::string chem_name(Rng& rng) {
  return rng.pick(kLocants) + "-" + rng.pick(kStems) + rng.pick(kBases);
}

std::string dec1(Rng& rng, double lo, double hi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", rng.uniform(lo, hi));
  return buf;
}

std::string num(Rng& rng, int lo, int hi) {
  return std::to_string(lo + static_cast<int>(rng.uniform_index(
                                 static_cast<std::size_t>(hi - lo + 1))));
}

std::string opening_sentence(Rng& rng) {
  std::string a = chem_name(rng);
  std::string b = chem_name(rng);
  std::string s = rng.pick(kSolvents);
  switch (rng.uniform_index(3)) {
    case 0:
      return "To a stirred solution of " + a + " (" + dec1(rng, 1, 40) +
             " g, " + dec1(rng, 2, 180) + " mmol) in " + s + " (" +
             num(rng, 5, 250) + " mL) was added " + b + " (" +
             dec1(rng, 1, 30) + " g) at " + num(rng, 0, 80) + " deg C.";
    case 1:
      return "A mixture of " + a + " (" + dec1(rng, 1, 40) + " g) and " + b +
             " (" + dec1(rng, 1, 30) + " g) in " + s + " (" +
             num(rng, 5, 250) + " mL) was heated to " + num(rng, 40, 120) +
             " deg C under nitrogen.";
    default:
      return a + " (" + dec1(rng, 1, 40) + " g, " + dec1(rng, 2, 180) +
             " mmol) was dissolved in " + s + " (" + num(rng, 5, 250) +
             " mL) and treated dropwise with " + b + " (" + dec1(rng, 1, 30) +
             " g).";
  }
}

std::string opening_para(Rng& rng) {
  std::string p = opening_sentence(rng);
  if (rng.uniform() < 0.5) {
    p += " The resulting mixture was stirred for " + num(rng, 1, 48) + " h.";
  }
  return p;
}

std::string middle_sentence(Rng& rng) {
  switch (rng.uniform_index(4)) {
    case 0:
      return "The reaction mixture was stirred at " + num(rng, 0, 120) +
             " deg C for " + num(rng, 1, 48) + " h and then quenched with " +
             rng.pick(kFormulas) + " solution.";
    case 1:
      return "After " + num(rng, 1, 48) +
             " h the suspension was filtered and the filtrate was "
             "concentrated under reduced pressure.";
    case 2:
      return "The organic layer was washed with " + rng.pick(kFormulas) +
             " (" + num(rng, 10, 200) + " mL), dried over " +
             rng.pick(kFormulas) + ", and evaporated.";
    default:
      return "Additional " + chem_name(rng) + " (" + dec1(rng, 0.5, 10) +
             " g) was added and stirring was continued for " +
             num(rng, 1, 24) + " h.";
  }
}

std::string middle_para(Rng& rng) {
  std::string p = middle_sentence(rng);
  if (rng.uniform() < 0.4) p += " " + middle_sentence(rng);
  return p;
}

std::string closing_para(Rng& rng) {
  std::string c = chem_name(rng);
  if (rng.uniform() < 0.5) {
    return "The crude product was purified by column chromatography to give " +
           c + " (" + dec1(rng, 0.5, 30) + " g, " + num(rng, 40, 95) +
           " %) as a " + rng.pick(kColors) + " solid.";
  }
  return "Recrystallization from " + rng.pick(kSolvents) + " afforded " + c +
         " (" + dec1(rng, 0.5, 30) + " g, " + num(rng, 40, 95) + " %) as " +
         rng.pick(kColors) + " crystals.";
}

std::string single_para(Rng& rng) {
  return opening_sentence(rng) +
         " The mixture was stirred for " + num(rng, 1, 24) +
         " h and the product was collected by filtration to give " +
         chem_name(rng) + " (" + dec1(rng, 0.5, 20) + " g, " +
         num(rng, 40, 95) + " %) as a " + rng.pick(kColors) + " solid.";
}

// outside the gold span, inside the closing paragraph
std::string tail_text(Rng& rng) {
  return "Melting point " + num(rng, 60, 180) + "-" + num(rng, 181, 260) +
         " deg C. IR (KBr): " + num(rng, 600, 1200) + ", " +
         num(rng, 1201, 2200) + ", " + num(rng, 2201, 3400) +
         " cm-1. Anal. calcd for the title compound: C " + dec1(rng, 40, 80) +
         ", H " + dec1(rng, 2, 9) + ", N " + dec1(rng, 1, 15) + ".";
}

std::string filler_para(Rng& rng) {
  // a small share of filler borrows recipe vocabulary so that per-unit
  // decoders see genuinely ambiguous paragraphs
  if (rng.uniform() < 0.1) {
    if (rng.uniform() < 0.5) {
      return "In general, the mixtures described herein may be stirred, "
             "filtered, and concentrated using any suitable equipment.";
    }
    return "Typical solvents include " + rng.pick(kSolvents) + " and " +
           rng.pick(kSolvents) + ", which may be dried before use.";
  }
  switch (rng.uniform_index(6)) {
    case 0:
      return "The invention further relates to processes for the preparation "
             "of substituted " +
             rng.pick(kBases) + " derivatives and salts thereof.";
    case 1:
      return "In some embodiments the substituents are selected from the "
             "groups defined above.";
    case 2:
      return "The compounds of the present disclosure are useful as "
             "intermediates for agrochemical production.";
    case 3:
      return "Reference is made to the accompanying examples, which do not "
             "limit the scope of the claims.";
    case 4:
      return "Suitable protecting groups and their removal are described in "
             "the cited literature.";
    default:
      return "Preferred embodiments include those wherein the heterocyclic "
             "core is unsubstituted.";
  }
}

std::size_t sample_reaction_len(Rng& rng) {
  double u = rng.uniform();
  if (u < 0.20) return 1;
  if (u < 0.55) return 2;
  if (u < 0.85) return 3;
  return 4;
}

struct GenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

std::string make_document(Rng& rng, const SynthProfile& prof,
                          std::vector<GenSpan>& spans, SynthSummary& sum) {
  std::size_t R = prof.reactions_per_doc;
  std::vector<std::size_t> lens(R);
  std::size_t total = 0;
  for (std::size_t r = 0; r < R; ++r) {
    lens[r] = sample_reaction_len(rng);
    sum.reaction_length_hist[lens[r]] += 1;
    total += lens[r];
  }
  std::size_t target = prof.paragraphs_per_doc;
  std::size_t jitter = target >= 5 ? target - 5 + rng.uniform_index(11) : target;
  std::size_t min_paras = total + (R > 0 ? R - 1 : 0);
  std::size_t P = std::max(jitter, min_paras);
  std::size_t filler = P - total;

  // one filler minimum between consecutive reactions; the rest spread over
  // all R+1 gaps
  std::vector<std::size_t> gaps(R + 1, 0);
  std::size_t spare = filler;
  for (std::size_t g = 1; g < R; ++g) {
    gaps[g] = 1;
    --spare;
  }
  for (std::size_t i = 0; i < spare; ++i) gaps[rng.uniform_index(R + 1)] += 1;

  struct Para {
    std::string text;
    int reaction = -1;
    bool first = false;
    bool last = false;
    std::size_t gold_len = 0;
  };
  std::vector<Para> paras;
  auto add_fillers = [&](std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      paras.push_back({filler_para(rng), -1, false, false, 0});
    }
  };
  add_fillers(gaps[0]);
  for (std::size_t r = 0; r < R; ++r) {
    bool tail = rng.uniform() < prof.property_tail_rate;
    if (tail) ++sum.property_tail_count;
    for (std::size_t i = 0; i < lens[r]; ++i) {
      Para p;
      p.reaction = static_cast<int>(r);
      p.first = i == 0;
      p.last = i + 1 == lens[r];
      if (lens[r] == 1) {
        p.text = single_para(rng);
      } else if (i == 0) {
        p.text = opening_para(rng);
      } else if (!p.last) {
        p.text = middle_para(rng);
      } else {
        p.text = closing_para(rng);
      }
      if (p.last) {
        p.gold_len = p.text.size();
        if (tail) p.text += " " + tail_text(rng);
      }
      paras.push_back(std::move(p));
    }
    add_fillers(gaps[r + 1]);
  }

  spans.assign(R, GenSpan{});
  std::string text;
  for (const Para& p : paras) {
    if (!text.empty()) text += "\n\n";
    std::size_t start = text.size();
    text += p.text;
    if (p.reaction >= 0) {
      auto r = static_cast<std::size_t>(p.reaction);
      if (p.first) spans[r].start = start;
      if (p.last) spans[r].end = start + p.gold_len;
    }
  }
  text += "\n";
  sum.paragraph_count += paras.size();
  sum.reaction_count += R;
  return text;
}

}  // namespace

SynthSummary generate_corpus(const SynthProfile& profile, std::uint64_t seed,
                             const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  SynthSummary sum;
  sum.doc_count = profile.doc_count;
  Rng rng(seed);

  for (std::size_t d = 0; d < profile.doc_count; ++d) {
    char name[32];
    std::snprintf(name, sizeof name, "doc_%03zu", d);
    std::vector<GenSpan> spans;
    std::string text = make_document(rng, profile, spans, sum);
    write_file(out_dir + "/" + name + ".txt", text);

    std::vector<ReactionAnnotation> anns;
    for (std::size_t r = 0; r < spans.size(); ++r) {
      ReactionAnnotation a;
      a.id = "T" + std::to_string(r + 1);
      a.span = {spans[r].start, spans[r].end};
      a.label = "REACTION";
      a.surface = text.substr(spans[r].start, spans[r].end - spans[r].start);
      anns.push_back(std::move(a));
    }
    write_file(out_dir + "/" + name + ".ann", write_ann(anns));
  }

  std::ostringstream lex;
  lex << "# single-token chemical names for the masking recognizer\n";
  for (const auto& s : kSolvents) lex << s << "\n";
  for (const auto& s : kFormulas) lex << s << "\n";
  write_file(out_dir + "/lexicon.dic", lex.str());

  std::ostringstream prof;
  prof << "docs = " << sum.doc_count << "\n";
  prof << "paragraphs = " << sum.paragraph_count << "\n";
  prof << "reactions = " << sum.reaction_count << "\n";
  prof << "property_tails = " << sum.property_tail_count << "\n";
  for (const auto& [len, count] : sum.reaction_length_hist) {
    prof << "reaction_len." << len << " = " << count << "\n";
  }
  write_file(out_dir + "/profile.kv", prof.str());
  return sum;
}

}  // namespace rex
