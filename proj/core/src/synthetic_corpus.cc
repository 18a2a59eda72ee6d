// Copyright 2026 The wmtrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wmtrace/synthetic_corpus.h"

#include <array>
#include <random>
#include <set>
#include <string_view>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_replace.h"
#include "wmtrace/synonyms.h"
#include "wmtrace/text.h"

namespace wmtrace {
namespace {

// Draws are taken directly from the engine so output does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  size_t Below(size_t n) { return static_cast<size_t>(engine_() % n); }
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  template <typename C>
  const auto& Pick(const C& c) {
    return c[Below(std::size(c))];
  }

 private:
  std::mt19937_64 engine_;
};

// Vocabulary is held as absl::string_view so it feeds absl string
// utilities directly.
struct Topic {
  absl::string_view field;
  std::vector<absl::string_view> nouns;
  std::vector<absl::string_view> adjectives;
  std::vector<absl::string_view> methods;
  std::vector<absl::string_view> contexts;
};

const std::vector<Topic>& Topics() {
  static const auto* topics = new std::vector<Topic>{
      {"condensed matter physics",
       {"superconductor", "spin lattice", "phonon spectrum", "quantum dot",
        "topological insulator", "electron gas", "magnetic domain",
        "heterostructure", "charge density wave", "crystal defect",
        "Fermi surface", "exciton", "thin film", "moire superlattice"},
       {"anisotropic", "metastable", "strongly correlated", "two-dimensional",
        "frustrated", "ferromagnetic", "disordered", "layered"},
       {"angle-resolved photoemission", "neutron scattering",
        "density functional theory", "scanning tunneling microscopy",
        "transport measurements", "Raman spectroscopy"},
       {"at cryogenic temperatures", "under uniaxial strain",
        "in high magnetic fields", "near the critical point",
        "across the phase boundary"}},
      {"molecular biology",
       {"protein complex", "gene regulatory network", "transcription factor",
        "ribosome", "signaling cascade", "chromatin loop", "membrane receptor",
        "enzyme", "stem cell population", "microRNA", "kinase",
        "mitochondrial genome", "cell cycle checkpoint"},
       {"conserved", "phosphorylated", "tissue-specific", "oncogenic",
        "regulatory", "heterozygous", "cytosolic", "extracellular"},
       {"single-cell sequencing", "cryo-electron microscopy",
        "CRISPR screening", "mass spectrometry", "live-cell imaging",
        "chromatin immunoprecipitation"},
       {"in mouse models", "in human organoids", "during embryonic development",
        "under oxidative stress", "in patient-derived samples"}},
      {"machine learning",
       {"transformer", "graph neural network", "reward model",
        "latent representation", "attention mechanism", "decision boundary",
        "loss landscape", "embedding space", "policy gradient",
        "generative model", "benchmark suite", "training objective",
        "retrieval index"},
       {"overparameterized", "self-supervised", "sparse", "calibrated",
        "adversarial", "multimodal", "contrastive", "lightweight"},
       {"stochastic gradient descent", "knowledge distillation",
        "variational inference", "reinforcement learning",
        "low-rank adaptation", "curriculum learning"},
       {"on standard benchmarks", "under distribution shift",
        "with limited supervision", "at web scale",
        "in low-resource settings"}},
      {"astrophysics",
       {"galaxy cluster", "accretion disk", "neutron star", "dark matter halo",
        "stellar population", "exoplanet atmosphere", "gravitational lens",
        "interstellar medium", "quasar", "protoplanetary disk", "supernova remnant",
        "cosmic ray flux"},
       {"high-redshift", "magnetized", "luminous", "metal-poor", "rotating",
        "compact", "relativistic", "diffuse"},
       {"spectroscopic surveys", "radio interferometry", "N-body simulations",
        "X-ray timing", "weak lensing analysis", "photometric monitoring"},
       {"in the local universe", "at cosmic dawn", "along the line of sight",
        "within the galactic plane", "over several orbital periods"}},
      {"organic chemistry",
       {"catalyst", "ligand", "reaction intermediate", "polymer chain",
        "chiral center", "cross-coupling reaction", "solvent system",
        "functional group", "macrocycle", "photoredox cycle", "ester linkage",
        "metal complex"},
       {"enantioselective", "air-stable", "water-soluble", "bifunctional",
        "electron-deficient", "sterically hindered", "recyclable", "porous"},
       {"nuclear magnetic resonance", "X-ray crystallography",
        "kinetic isotope experiments", "cyclic voltammetry",
        "high-throughput screening", "computational modeling"},
       {"under mild conditions", "at room temperature", "in aqueous media",
        "on gram scale", "without protecting groups"}},
      {"climate science",
       {"ice sheet", "ocean circulation", "aerosol layer", "carbon sink",
        "monsoon system", "permafrost region", "cloud feedback",
        "sea surface temperature", "precipitation extreme", "land surface model",
        "boundary layer", "drought index"},
       {"regional", "decadal", "anthropogenic", "coupled", "seasonal",
        "high-latitude", "semi-arid", "coastal"},
       {"reanalysis products", "satellite altimetry", "Earth system models",
        "paleoclimate proxies", "ensemble forecasting", "eddy covariance"},
       {"over the last century", "under warming scenarios",
        "across the tropics", "in the North Atlantic",
        "during El Nino events"}},
      {"neuroscience",
       {"cortical circuit", "synaptic connection", "place cell",
        "dopamine signal", "neural population", "hippocampal replay",
        "dendritic spine", "oscillation", "motor cortex", "sensory pathway",
        "working memory trace", "glial cell"},
       {"inhibitory", "excitatory", "task-relevant", "recurrent", "plastic",
        "sparse", "thalamic", "behaviorally relevant"},
       {"two-photon imaging", "optogenetic perturbation",
        "electrophysiological recordings", "functional MRI",
        "connectomic reconstruction", "computational modeling"},
       {"in behaving animals", "during sleep", "across learning",
        "in the visual system", "under anesthesia"}},
      {"materials engineering",
       {"alloy", "ceramic coating", "composite laminate", "battery cathode",
        "solid electrolyte", "grain boundary", "additively manufactured part",
        "metamaterial", "perovskite film", "fiber interface", "hydrogel",
        "fatigue crack"},
       {"lightweight", "high-entropy", "nanostructured", "flexible",
        "thermally stable", "corrosion-resistant", "brittle", "ductile"},
       {"in situ electron microscopy", "finite element analysis",
        "synchrotron diffraction", "nanoindentation", "impedance spectroscopy",
        "phase-field simulations"},
       {"under cyclic loading", "at elevated temperatures",
        "in harsh environments", "over thousands of cycles",
        "at industrial scale"}},
      {"economics",
       {"labor market", "monetary policy", "trade network", "housing price",
        "income distribution", "credit cycle", "household survey",
        "minimum wage", "supply chain", "exchange rate", "tax incentive",
        "firm productivity"},
       {"heterogeneous", "informal", "cross-country", "long-run",
        "credit-constrained", "regional", "structural", "counterfactual"},
       {"difference-in-differences", "instrumental variables",
        "structural estimation", "randomized field experiments",
        "panel regressions", "general equilibrium modeling"},
       {"in developing economies", "after the financial crisis",
        "across OECD countries", "at the county level",
        "over business cycles"}},
      {"applied mathematics",
       {"operator", "eigenvalue problem", "stochastic process",
        "boundary value problem", "manifold", "sparse matrix", "Markov chain",
        "variational principle", "integral equation", "finite element space",
        "optimal transport map", "dynamical system"},
       {"nonlinear", "ill-posed", "high-dimensional", "convex", "periodic",
        "singular", "stochastic", "well-conditioned"},
       {"spectral methods", "multigrid solvers", "Monte Carlo sampling",
        "asymptotic analysis", "a posteriori error estimates",
        "randomized linear algebra"},
       {"on unstructured meshes", "in the small-noise limit",
        "for large time horizons", "under mild regularity assumptions",
        "with sharp constants"}},
      {"public health",
       {"vaccination campaign", "cohort", "screening program",
        "transmission chain", "hospital admission", "risk factor",
        "health record", "intervention", "mortality trend", "care pathway",
        "surveillance system", "clinical outcome"},
       {"community-based", "longitudinal", "population-level", "preventable",
        "age-stratified", "rural", "underserved", "nationwide"},
       {"retrospective cohort analysis", "cluster randomized trials",
        "Bayesian hierarchical models", "contact tracing data",
        "mixed-methods evaluation", "propensity score matching"},
       {"in low-income settings", "during the pandemic",
        "among older adults", "across primary care practices",
        "over a ten-year follow-up"}},
      {"robotics",
       {"manipulator", "legged robot", "grasp planner", "tactile sensor",
        "motion primitive", "swarm", "visual odometry pipeline",
        "soft actuator", "trajectory optimizer", "collision checker",
        "exoskeleton", "navigation stack"},
       {"compliant", "underactuated", "real-time", "autonomous", "modular",
        "bio-inspired", "safety-critical", "dexterous"},
       {"model predictive control", "imitation learning",
        "simultaneous localization and mapping", "sim-to-real transfer",
        "impedance control", "sampling-based planning"},
       {"in cluttered environments", "on rough terrain",
        "in human-robot collaboration", "under sensor noise",
        "with onboard computation"}},
  };
  return *topics;
}

constexpr std::array<absl::string_view, 8> kIntroFrames = {
    "We {study} the {a} {n} {c}.",
    "This work examines how the {n} responds to changes in the {n2} {c}.",
    "Understanding the {a} {n} remains a central open problem in {f}.",
    "The {n} plays a key role in {f}, yet its interplay with the {n2} is "
    "poorly understood.",
    "We present a systematic investigation of the {a} {n} using {m}.",
    "Recent progress in {f} has renewed interest in the {n} and its "
    "coupling to the {n2}.",
    "Here we revisit the long-standing question of how a {a} {n} emerges "
    "{c}.",
    "Despite decades of work in {f}, the behavior of the {n} {c} is still "
    "debated.",
};

constexpr std::array<absl::string_view, 34> kBodyFrames = {
    "Using {m}, we show that the {n} exhibits a {g} dependence on the {n2}.",
    "Combining {m} with {m2}, we resolve the {a} {n} with unprecedented "
    "detail.",
    "Our measurements reveal that the {n2} shifts by {pct} when the {n} "
    "becomes {a}.",
    "We find that {num} distinct regimes appear, separated by a sharp "
    "transition {c}.",
    "A minimal model captures the essential features of the {n} and "
    "predicts a {g} scaling law.",
    "The observed {n2} is consistent with a mechanism in which the {n} "
    "mediates feedback {c}.",
    "In contrast to earlier reports, the {a} {n} does not require a "
    "{g} {n2}.",
    "Across {num} independent datasets, the {g} effect persists and "
    "grows with the size of the {n}.",
    "We introduce a {g} framework that links the {n} to observable "
    "signatures in the {n2}.",
    "Systematic controls rule out artifacts arising from the {n2} and from "
    "the choice of {m}.",
    "The {n} relaxes on a timescale of {num} units, markedly slower than "
    "the {n2}.",
    "These results establish the {a} {n} as a sensitive probe of the "
    "{n2} {c}.",
    "Remarkably, a {g} {n2} suppresses the response by nearly {pct}.",
    "Simulations based on {m2} reproduce the measured trends without "
    "adjustable parameters.",
    "We further identify a {g} precursor that anticipates the onset of "
    "the {n} instability.",
    "The approach generalizes to {a} variants of the {n2} and scales to "
    "larger systems.",
    "Quantitative agreement with {m} confirms the role of the {n2} in "
    "shaping the {n}.",
    "Perturbing the {n2} alters the {n} within {num} steps, revealing a "
    "causal link.",
    "Statistical analysis of {num} samples shows that the {g} trend is "
    "robust to noise {c}.",
    "Our data indicate that the {n} and the {n2} compete rather than "
    "cooperate {c}.",
    "The resulting maps expose {g} heterogeneity in the {n} that was "
    "hidden in averaged data.",
    "Benchmarking against {m2} demonstrates an improvement of {pct} in "
    "accuracy.",
    "Contrary to intuition, increasing the {n2} weakens rather than "
    "strengthens the {n}.",
    "A dedicated calibration campaign with {m} reduced systematic "
    "uncertainties to below {pct}.",
    "We trace this behavior to a {g} interplay between the {n} and "
    "local fluctuations {c}.",
    "An open-source implementation of the {m} pipeline accompanies the "
    "analysis of the {n2}.",
    "Surprisingly, the {n} remains {a} even when the {n2} is removed "
    "entirely.",
    "High-resolution data from {m} expose a hierarchy of timescales "
    "governing the {n}.",
    "When the {n2} is tuned across {num} settings, the {n} follows a "
    "{g} trajectory.",
    "Ablation experiments isolate the contribution of the {n2} and "
    "quantify its weight at {pct}.",
    "The dominant contribution stems from the {n2}, whereas the {n} acts "
    "only as a weak modifier.",
    "Extending the analysis to {num} additional cases reveals no "
    "exceptions to the {g} trend.",
    "We quantify uncertainty with {m2} and report intervals that cover "
    "the observed {n2}.",
    "Theoretical arguments based on symmetry explain why the {a} {n} "
    "is favored {c}.",
};

constexpr std::array<absl::string_view, 8> kClosingFrames = {
    "These findings open new avenues for controlling the {n} in {f}.",
    "Our results provide a framework for the design of {a} {n} systems.",
    "The methodology is general and can be applied to other {a} "
    "problems in {f}.",
    "This work lays the foundation for {g} predictive models of the {n} "
    "{c}.",
    "We discuss implications for future studies of the {n2} and the {n}.",
    "Taken together, the {m} data call for a revision of current models "
    "of the {a} {n}.",
    "We anticipate that these {g} insights will guide experiments on the "
    "{n2}.",
    "Code and data accompanying this study of the {n} are released to "
    "support further work in {f}.",
};

constexpr std::array<absl::string_view, 10> kGeneralAdjectives = {
    "nonmonotonic", "universal",  "robust",    "pronounced", "linear",
    "logarithmic",  "hysteretic", "transient", "persistent", "collective"};

constexpr std::array<absl::string_view, 6> kStudyVerbs = {
    "investigate", "characterize", "examine", "quantify", "probe", "analyze"};

constexpr std::array<absl::string_view, 16> kMarkers = {
    "Notably,",  "In particular,", "Moreover,",  "Importantly,",
    "In addition,", "Crucially,",  "Furthermore,", "As a result,",
    "At the same time,", "In practice,", "Consequently,", "Indeed,",
    "By comparison,", "Beyond this,", "Interestingly,", "Overall,"};

// Index of a uniform draw from [0, n) that differs from `avoid`.
size_t OtherIndex(size_t avoid, size_t n, Rng& rng) {
  return (avoid + 1 + rng.Below(n - 1)) % n;
}

std::string FillFrame(absl::string_view frame, const Topic& t, Rng& rng) {
  const size_t n = rng.Below(t.nouns.size());
  const size_t n2 = OtherIndex(n, t.nouns.size(), rng);
  const size_t m = rng.Below(t.methods.size());
  const size_t m2 = OtherIndex(m, t.methods.size(), rng);
  return absl::StrReplaceAll(
      frame, {{"{n}", t.nouns[n]},
              {"{n2}", t.nouns[n2]},
              {"{a}", rng.Pick(t.adjectives)},
              {"{g}", rng.Pick(kGeneralAdjectives)},
              {"{m}", t.methods[m]},
              {"{m2}", t.methods[m2]},
              {"{c}", rng.Pick(t.contexts)},
              {"{f}", t.field},
              {"{study}", rng.Pick(kStudyVerbs)},
              {"{num}", absl::StrCat(2 + rng.Below(40))},
              {"{pct}", absl::StrCat(3 + rng.Below(60), " percent")}});
}

// Synonym swaps at a fixed rate so texts built from the same frame do not
// repeat long word runs verbatim.
constexpr double kLexicalVariation = 0.5;

std::string Vary(std::string_view text, Rng& rng);

const Topic& TopicOf(uint64_t abstract_seed) {
  // Same first draw as SyntheticAbstract.
  Rng rng(abstract_seed * 0x9E3779B97F4A7C15ULL + 0x5eed);
  return rng.Pick(Topics());
}

std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// A filled body frame, opened by a discourse marker half of the time.
std::string BodySentence(absl::string_view frame, const Topic& t, Rng& rng) {
  std::string s = FillFrame(frame, t, rng);
  if (rng.Unit() < 0.5) {
    if (s.size() > 1 && std::islower(static_cast<unsigned char>(s[1])) &&
        s[0] != 'X' && s[0] != 'N') {
      s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    }
    return absl::StrCat(rng.Pick(kMarkers), " ", s);
  }
  return Capitalize(std::move(s));
}

}  // namespace

std::string SyntheticAbstract(uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x5eed);
  const Topic& topic = rng.Pick(Topics());
  std::vector<std::string> sentences;
  sentences.push_back(
      Capitalize(FillFrame(rng.Pick(kIntroFrames), topic, rng)));
  size_t words = CountWords(sentences.back());
  std::array<size_t, kBodyFrames.size()> order;
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.Below(i + 1)]);
  }
  const std::string closing =
      Capitalize(FillFrame(rng.Pick(kClosingFrames), topic, rng));
  const size_t closing_words = CountWords(closing);
  const size_t target = 120 + rng.Below(50);
  for (size_t i = 0; i < order.size() && words + closing_words < target;
       ++i) {
    std::string s = BodySentence(kBodyFrames[order[i]], topic, rng);
    const size_t w = CountWords(s);
    if (words + w + closing_words > 180) break;
    words += w;
    sentences.push_back(std::move(s));
  }
  sentences.push_back(closing);
  return Vary(absl::StrJoin(sentences, " "), rng);
}

std::string SyntheticCorpusId(size_t index) {
  return absl::StrFormat("syn-%06d", index);
}

uint64_t SyntheticAbstractSeed(uint64_t corpus_seed, size_t index) {
  return corpus_seed * 1000003ULL + index;
}

std::string SyntheticStandIn(uint64_t abstract_seed, size_t words,
                             uint64_t seed) {
  const Topic& topic = TopicOf(abstract_seed);
  Rng rng(seed ^ 0x57A9D1ULL);
  std::vector<std::string> out;
  std::string sentence =
      Capitalize(FillFrame(rng.Pick(kIntroFrames), topic, rng));
  while (true) {
    for (std::string_view w : SplitWords(sentence)) {
      out.emplace_back(w);
      if (out.size() == words) return Vary(JoinWords(out), rng);
    }
    sentence = BodySentence(rng.Pick(kBodyFrames), topic, rng);
  }
}

std::vector<Sequence> SyntheticCorpus(size_t n, uint64_t seed) {
  std::vector<Sequence> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Sequence s;
    s.id = SyntheticCorpusId(i);
    s.text = SyntheticAbstract(SyntheticAbstractSeed(seed, i));
    s.token_count = CountWords(s.text);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<std::string> Continuations(size_t count, uint64_t seed,
                                       size_t min_words, const Topic* fixed) {
  Rng rng(seed ^ 0xD1CE5EEDULL);
  std::set<std::string> openings;
  std::vector<std::string> out;
  out.reserve(count);
  const std::vector<Topic>& topics = Topics();
  constexpr std::array<absl::string_view, 8> kLinks = {
      "that", "which", "whose", "where", "while", "and", "whereby", "so"};
  size_t attempts = 0;
  while (out.size() < count && attempts++ < count * 200) {
    const Topic& t = fixed ? *fixed : topics[rng.Below(topics.size())];
    // Opening: "<adjective> <noun...> <link>" so the first three words vary
    // across topics and draws.
    std::string head = absl::StrCat(rng.Pick(t.adjectives), " ",
                                    rng.Pick(t.nouns), " ", rng.Pick(kLinks));
    std::vector<std::string_view> head_words = SplitWords(head);
    std::string key = AsciiLower(JoinWords(std::vector<std::string_view>(
        head_words.begin(),
        head_words.begin() + std::min<size_t>(3, head_words.size()))));
    if (!openings.insert(key).second) continue;
    std::string body = FillFrame(rng.Pick(kBodyFrames), t, rng);
    body[0] =
        static_cast<char>(std::tolower(static_cast<unsigned char>(body[0])));
    std::string text = absl::StrCat(head, " ", body);
    size_t words = CountWords(text);
    const std::string closing =
        Capitalize(FillFrame(rng.Pick(kClosingFrames), t, rng));
    const size_t closing_words = CountWords(closing);
    do {
      const std::string s = BodySentence(rng.Pick(kBodyFrames), t, rng);
      words += CountWords(s);
      absl::StrAppend(&text, " ", s);
    } while (words + closing_words < min_words);
    absl::StrAppend(&text, " ", closing);
    out.push_back(Vary(text, rng));
  }
  return out;
}

}  // namespace

std::vector<std::string> DivergentContinuations(size_t count, uint64_t seed,
                                                size_t min_words) {
  return Continuations(count, seed, min_words, nullptr);
}

std::vector<std::string> TopicContinuations(uint64_t abstract_seed,
                                            size_t count, uint64_t seed,
                                            size_t min_words) {
  return Continuations(count, seed, min_words, &TopicOf(abstract_seed));
}

std::string SynonymParaphrase(std::string_view text, double rate,
                              uint64_t seed) {
  Rng rng(seed ^ 0x5A5A5A5AULL);
  const SynonymTable& table = SynonymTable::Default();
  std::vector<std::string> out;
  for (std::string_view w : SplitWords(text)) {
    std::span<const std::string> syn = table.Lookup(SynonymTable::Core(w));
    if (!syn.empty() && rng.Unit() < rate) {
      out.push_back(SynonymTable::Substitute(w, syn[rng.Below(syn.size())]));
    } else {
      out.emplace_back(w);
    }
  }
  return JoinWords(out);
}

namespace {

std::string Vary(std::string_view text, Rng& rng) {
  const SynonymTable& table = SynonymTable::Default();
  std::vector<std::string> out;
  for (std::string_view w : SplitWords(text)) {
    std::span<const std::string> syn = table.Lookup(SynonymTable::Core(w));
    if (!syn.empty() && rng.Unit() < kLexicalVariation) {
      out.push_back(SynonymTable::Substitute(w, syn[rng.Below(syn.size())]));
    } else {
      out.emplace_back(w);
    }
  }
  return JoinWords(out);
}

}  // namespace

std::vector<std::string> ParaphraseCluster(size_t copies, uint64_t seed) {
  const std::string fact = SyntheticAbstract(seed ^ 0xFAC7ULL);
  std::vector<std::string> out;
  out.reserve(copies);
  for (size_t i = 0; i < copies; ++i) {
    out.push_back(SynonymParaphrase(fact, 0.5, seed * 7919 + i));
  }
  return out;
}

std::string RandomAlphanumeric(size_t length, uint64_t seed) {
  static constexpr absl::string_view kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  Rng rng(seed ^ 0xA1FAULL);
  std::string s(length, ' ');
  for (char& c : s) c = kAlphabet[rng.Below(kAlphabet.size())];
  return s;
}

}  // namespace wmtrace
