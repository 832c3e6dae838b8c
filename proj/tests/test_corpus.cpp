#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "emodist/corpus.hpp"
#include "emodist/random.hpp"
#include "emodist/text.hpp"

using namespace emodist;

namespace {

const char* kFeedSample = R"([
 [
  {
   "created_time": "2016-06-19T01:40:00+0000",
   "message": "Walt Disney World representatives said they plan to put up fencing and signs at all resorts and waterways.",
   "reactions": [5073, 4483, 60, 22, 54, 284, 170, 0]
  }
 ],
 [
  {
   "created_time": "2016-06-19T01:00:00+0000",
   "message": "Charlene and Joseph Handrik face more than 550 counts of animal cruelty.",
   "reactions": [2256, 1011, 16, 6, 123, 409, 691, 0]
  }
 ]
])";

ReactionPost post(ReactionCounts r, std::string message = "text") { return {"2016-01-01T00:00:00+0000", message, r}; }

// Independent restatement of the labeling rule used as an oracle below.
std::optional<Emotion> oracle_label(const ReactionCounts& r) {
  const std::array<std::size_t, 5> slots = {2, 3, 4, 5, 6};
  const std::array<Emotion, 5> targets = {Emotion::joy, Emotion::joy, Emotion::surprise, Emotion::sadness,
                                          Emotion::anger};
  std::int64_t best = 0;
  std::optional<Emotion> out;
  for (std::size_t k = 0; k < 5; ++k) {
    if (r[slots[k]] > best) {
      best = r[slots[k]];
      out = targets[k];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("emotion enumeration order and names") {
  REQUIRE(kEmotions.size() == 4);
  CHECK(ordinal(Emotion::anger) == 0);
  CHECK(ordinal(Emotion::joy) == 1);
  CHECK(ordinal(Emotion::sadness) == 2);
  CHECK(ordinal(Emotion::surprise) == 3);
  for (auto e : kEmotions) CHECK(parse_emotion(to_string(e)) == e);
  CHECK(parse_emotion("JOY") == Emotion::joy);
  CHECK_FALSE(parse_emotion("fear").has_value());
}

TEST_CASE("label schemes map every raw label to one target or dropped") {
  using E = Emotion;
  struct Row {
    Scheme scheme;
    const char* raw;
    std::optional<E> target;
  };
  const std::vector<Row> rows = {
      {Scheme::facebook, "love", E::joy},         {Scheme::facebook, "haha", E::joy},
      {Scheme::facebook, "wow", E::surprise},     {Scheme::facebook, "sad", E::sadness},
      {Scheme::facebook, "angry", E::anger},      {Scheme::facebook, "like", std::nullopt},
      {Scheme::facebook, "thankful", std::nullopt},
      {Scheme::affective, "anger", E::anger},     {Scheme::affective, "disgust", E::anger},
      {Scheme::affective, "joy", E::joy},         {Scheme::affective, "sadness", E::sadness},
      {Scheme::affective, "surprise", E::surprise}, {Scheme::affective, "fear", std::nullopt},
      {Scheme::fairy_tales, "angry-disgusted", E::anger}, {Scheme::fairy_tales, "happy", E::joy},
      {Scheme::fairy_tales, "sad", E::sadness},   {Scheme::fairy_tales, "surprised", E::surprise},
      {Scheme::fairy_tales, "fearful", std::nullopt},
      {Scheme::isear, "anger", E::anger},         {Scheme::isear, "disgust", E::anger},
      {Scheme::isear, "joy", E::joy},             {Scheme::isear, "sadness", E::sadness},
      {Scheme::isear, "fear", std::nullopt},      {Scheme::isear, "shame", std::nullopt},
      {Scheme::isear, "guilt", std::nullopt},
  };
  for (const auto& row : rows) {
    CAPTURE(row.raw);
    CHECK(map_source_label(row.scheme, row.raw) == row.target);
  }
  CHECK_THROWS_AS(map_source_label(Scheme::isear, "surprise"), DataError);
  CHECK_THROWS_AS(map_source_label(Scheme::facebook, "meh"), DataError);

  for (auto scheme : {Scheme::facebook, Scheme::affective, Scheme::fairy_tales, Scheme::isear}) {
    std::set<std::string> seen;
    for (const auto& entry : scheme_table(scheme)) {
      CHECK(seen.insert(std::string(entry.raw)).second);
      CHECK(map_source_label(scheme, entry.raw) == entry.target);
    }
    CHECK(parse_scheme(to_string(scheme)) == scheme);
  }
}

TEST_CASE("parse_reaction_feed reads the wrapped sample") {
  const auto posts = parse_reaction_feed(kFeedSample);
  REQUIRE(posts.size() == 2);
  CHECK(posts[0].created_time == "2016-06-19T01:40:00+0000");
  CHECK(posts[0].message.starts_with("Walt Disney World representatives said"));
  CHECK(posts[0].reactions == ReactionCounts{5073, 4483, 60, 22, 54, 284, 170, 0});
  CHECK(posts[1].reactions == ReactionCounts{2256, 1011, 16, 6, 123, 409, 691, 0});
  CHECK(posts[0].count(Slot::sad) == 284);
}

TEST_CASE("parse_reaction_feed edge cases") {
  CHECK(parse_reaction_feed("[]").empty());

  SUBCASE("flat array") {
    const auto posts = parse_reaction_feed(
        R"([{"created_time": "t", "message": "m", "reactions": [1,0,1,0,0,0,0,0]}])");
    REQUIRE(posts.size() == 1);
    CHECK(posts[0].message == "m");
  }
  SUBCASE("seven reactions is a record error at index 0") {
    const char* doc = R"([[{"created_time": "t", "message": "m", "reactions": [1,2,3,4,5,6,7]}]])";
    try {
      parse_reaction_feed(doc);
      FAIL("expected RecordError");
    } catch (const RecordError& e) {
      CHECK(e.record() == 0);
    }
    std::vector<RecordIssue> skipped;
    CHECK(parse_reaction_feed(doc, LoadMode::tolerant, &skipped).empty());
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0].record == 0);
  }
  SUBCASE("negative count in the second record") {
    const char* doc =
        R"([[{"created_time": "t", "message": "a", "reactions": [1,0,1,0,0,0,0,0]}],
            [{"created_time": "t", "message": "b", "reactions": [1,0,-1,0,0,0,0,0]}]])";
    try {
      parse_reaction_feed(doc);
      FAIL("expected RecordError");
    } catch (const RecordError& e) {
      CHECK(e.record() == 1);
    }
    std::vector<RecordIssue> skipped;
    const auto posts = parse_reaction_feed(doc, LoadMode::tolerant, &skipped);
    REQUIRE(posts.size() == 1);
    CHECK(posts[0].message == "a");
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0].record == 1);
  }
  SUBCASE("missing field") {
    CHECK_THROWS_AS(parse_reaction_feed(R"([{"message": "m", "reactions": [0,0,0,0,0,0,0,0]}])"), RecordError);
  }
  SUBCASE("malformed JSON reports a byte offset") {
    try {
      parse_reaction_feed("[[{\"created_time\": ");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() > 0);
      CHECK(e.offset() <= 20);
    }
    CHECK_THROWS_AS(parse_reaction_feed(R"({"not": "an array"})"), DataError);
  }
}

TEST_CASE("write_reaction_feed round-trips") {
  const auto posts = parse_reaction_feed(kFeedSample);
  const auto once = write_reaction_feed(posts);
  const auto again = parse_reaction_feed(once);
  CHECK(again == posts);
  CHECK(write_reaction_feed(again) == once);
  CHECK(parse_reaction_feed(write_reaction_feed({})).empty());
}

TEST_CASE("assign_label on the sample vectors") {
  const auto posts = parse_reaction_feed(kFeedSample);
  CHECK(assign_label(posts[0]) == Emotion::sadness);
  CHECK(assign_label(posts[1]) == Emotion::anger);
  CHECK_FALSE(assign_label(post({10, 10, 0, 0, 0, 0, 0, 0})).has_value());
}

TEST_CASE("assign_label ties and summing") {
  // love == wow: love comes first.
  CHECK(assign_label(post({0, 0, 5, 0, 5, 0, 0, 0})) == Emotion::joy);
  // wow == angry: wow comes first.
  CHECK(assign_label(post({0, 0, 0, 0, 7, 0, 7, 0})) == Emotion::surprise);
  LabelOptions discard;
  discard.ties = TiePolicy::discard;
  CHECK_FALSE(assign_label(post({0, 0, 0, 0, 7, 0, 7, 0}), discard).has_value());
  CHECK(assign_label(post({0, 0, 0, 0, 7, 0, 8, 0}), discard) == Emotion::anger);

  // love 4 + haha 4 = joy 8 beats sad 6 only when summed.
  const auto p = post({0, 0, 4, 4, 0, 6, 0, 0});
  CHECK(assign_label(p) == Emotion::sadness);
  LabelOptions summed;
  summed.sum_before_argmax = true;
  CHECK(assign_label(p, summed) == Emotion::joy);
}

TEST_CASE("assign_label properties") {
  Rng rng(20240611);
  for (int trial = 0; trial < 2000; ++trial) {
    ReactionCounts r{};
    for (auto& v : r) v = static_cast<std::int64_t>(uniform_index(rng, trial % 3 == 0 ? 4 : 200));
    const auto label = assign_label(post(r));
    CHECK(label == oracle_label(r));

    // total, like and thankful never matter.
    auto perturbed = r;
    perturbed[0] = static_cast<std::int64_t>(uniform_index(rng, 100000));
    perturbed[1] = static_cast<std::int64_t>(uniform_index(rng, 100000));
    perturbed[7] = static_cast<std::int64_t>(uniform_index(rng, 100000));
    CHECK(assign_label(post(perturbed)) == label);

    if (label) {
      bool found = false;
      for (auto slot : kMeaningfulSlots) {
        const auto name = std::array{"total", "like", "love", "haha", "wow", "sad", "angry", "thankful"}
            [static_cast<std::size_t>(slot)];
        if (map_source_label(Scheme::facebook, name) != label) continue;
        bool is_max = true;
        for (auto other : kMeaningfulSlots) is_max = is_max && post(r).count(slot) >= post(r).count(other);
        found = found || is_max;
      }
      CHECK(found);
    }
  }
}

TEST_CASE("reaction entropy and the entropy filter") {
  CHECK(reaction_entropy(post({100, 0, 0, 0, 0, 100, 0, 0})) == 0.0);
  const auto uniform = reaction_entropy(post({5, 0, 1, 1, 1, 1, 1, 0}));
  REQUIRE(uniform.has_value());
  CHECK(*uniform == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK_FALSE(reaction_entropy(post({3, 3, 0, 0, 0, 0, 0, 3})).has_value());

  const std::vector<ReactionPost> posts = {post({100, 0, 0, 0, 0, 100, 0, 0}, "peaked"),
                                           post({5, 0, 1, 1, 1, 1, 1, 0}, "uniform"),
                                           post({3, 3, 0, 0, 0, 0, 0, 0}, "none")};
  const auto kept = entropy_filter(posts, 1.0);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].message == "peaked");
  CHECK(entropy_filter(posts, 0.0).size() == 1);
  CHECK(entropy_filter(posts, 2.0).size() == 2);
  CHECK(entropy_filter({}, 1.0).empty());

  // Two equal slots: ln 2.
  CHECK(*reaction_entropy(post({0, 0, 0, 0, 3, 3, 0, 0})) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy filter is monotone in the threshold") {
  Rng rng(7);
  std::vector<ReactionPost> posts;
  for (int i = 0; i < 300; ++i) {
    ReactionCounts r{};
    for (auto& v : r) v = static_cast<std::int64_t>(uniform_index(rng, 6));
    posts.push_back(post(r, std::to_string(i)));
  }
  std::set<std::string> previous;
  for (double t = 0.0; t <= 1.7; t += 0.05) {
    std::set<std::string> kept;
    for (const auto& p : entropy_filter(posts, t)) kept.insert(p.message);
    CHECK(std::includes(kept.begin(), kept.end(), previous.begin(), previous.end()));
    previous = std::move(kept);
  }
}

TEST_CASE("label_feed drops unlabeled and blank posts") {
  const std::vector<ReactionPost> posts = {post({1, 0, 0, 0, 0, 1, 0, 0}, "sad news"),
                                           post({1, 1, 0, 0, 0, 0, 0, 0}, "nothing"),
                                           post({1, 0, 0, 0, 0, 0, 1, 0}, "   ")};
  const auto docs = label_feed(posts, "Page");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0] == LabeledDoc{"sad news", Emotion::sadness, "Page"});
}

TEST_CASE("canonical TSV parsing") {
  const auto docs = parse_canonical_tsv("joy\tisear\tI passed my exam\n");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0] == LabeledDoc{"I passed my exam", Emotion::joy, "isear"});
  CHECK(parse_canonical_tsv("").empty());

  SUBCASE("text may contain tabs and CRLF endings are accepted") {
    const auto d = parse_canonical_tsv("anger\tsrc\ta\tb\r\n\nsadness\tsrc\tc\n");
    REQUIRE(d.size() == 2);
    CHECK(d[0].text == "a\tb");
    CHECK(d[1].label == Emotion::sadness);
  }
  SUBCASE("unknown label reports the line") {
    try {
      parse_canonical_tsv("joy\tx\tfine\nfear\tisear\tdark night\n");
      FAIL("expected RecordError");
    } catch (const RecordError& e) {
      CHECK(e.record() == 2);
      CHECK(e.reason().find("unknown canonical label") != std::string::npos);
    }
  }
  SUBCASE("too few fields") {
    try {
      parse_canonical_tsv("joy\tonly two\n");
      FAIL("expected RecordError");
    } catch (const RecordError& e) {
      CHECK(e.record() == 1);
    }
  }
  SUBCASE("tolerant mode skips bad lines") {
    std::vector<RecordIssue> skipped;
    const auto d = parse_canonical_tsv("fear\tx\ty\njoy\tx\tfine\nanger\tx\t  \n", LoadMode::tolerant, &skipped);
    REQUIRE(d.size() == 1);
    REQUIRE(skipped.size() == 2);
    CHECK(skipped[0].record == 1);
    CHECK(skipped[1].record == 3);
  }
}

TEST_CASE("canonical TSV round-trips and loaders are idempotent") {
  std::vector<LabeledDoc> docs = {{"plain text", Emotion::joy, "a"},
                                  {"tab\there and\nnewline", Emotion::anger, "b"},
                                  {"ünïcödé ✓", Emotion::surprise, "c"}};
  const auto once = write_canonical_tsv(docs);
  const auto parsed = parse_canonical_tsv(once);
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[1].text == "tab here and newline");
  CHECK(write_canonical_tsv(parsed) == once);
  CHECK(parse_canonical_tsv(once) == parsed);
}

TEST_CASE("affective score mapping") {
  CHECK(map_affective_scores({10, 5, 0, 80, 20, 30}, 50) == Emotion::joy);
  CHECK_FALSE(map_affective_scores({30, 40, 0, 10, 20, 5}, 50).has_value());
  CHECK(map_affective_scores({30, 40, 0, 10, 20, 5}, 40) == Emotion::anger);
  CHECK_FALSE(map_affective_scores({0, 0, 0, 0, 0, 0}, 1).has_value());
  CHECK_FALSE(map_affective_scores({0, 0, 0, 0, 0, 0}, 0).has_value());
  // fear is ignored even when dominant.
  CHECK(map_affective_scores({0, 0, 99, 0, 60, 0}, 50) == Emotion::sadness);
  // ties go to the earlier emotion.
  CHECK(map_affective_scores({0, 70, 0, 70, 0, 0}, 50) == Emotion::anger);
  CHECK_THROWS_AS(map_affective_scores({0, 0, 0, 101, 0, 0}, 50), DataError);
  CHECK_THROWS_AS(map_affective_scores({0, -1, 0, 0, 0, 0}, 50), DataError);
  CHECK_THROWS_AS(map_affective_scores({0, 0, 0, 0, 0, 0}, 101), DataError);
}

TEST_CASE("fairy tale agreement filter") {
  const std::vector<FairyTaleRecord> records = {{"one", {"angry", "disgusted"}},
                                                {"two", {"happy", "sad"}},
                                                {"three", {"fearful", "fearful"}},
                                                {"four", {"surprised", "surprised"}},
                                                {"five", {"sad"}}};
  const auto docs = load_fairy_tales(records);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0] == LabeledDoc{"one", Emotion::anger, "fairy_tales"});
  CHECK(docs[1].label == Emotion::surprise);
  CHECK(docs[2].label == Emotion::sadness);

  const std::vector<FairyTaleRecord> bad = {{"ok", {"happy"}}, {"bad", {"happy", "gleeful"}}};
  try {
    load_fairy_tales(bad);
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.record() == 1);
  }
  std::vector<RecordIssue> skipped;
  CHECK(load_fairy_tales(bad, LoadMode::tolerant, &skipped).size() == 1);
  CHECK(skipped.size() == 1);
}

TEST_CASE("benchmark rows from the converter scripts") {
  const auto isear = parse_benchmark_tsv("joy\tI passed my exam\nfear\tA dark road\nDisgust\tRotten food\n", Scheme::isear, "isear");
  REQUIRE(isear.size() == 2);
  CHECK(isear[0] == LabeledDoc{"I passed my exam", Emotion::joy, "isear"});
  CHECK(isear[1].label == Emotion::anger);
  try {
    parse_benchmark_tsv("joy\tok\nsurprise\tnot an isear label\n", Scheme::isear, "isear");
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.record() == 2);
  }

  const std::string affective = "10\t5\t0\t80\t20\t30\tGood news\n30\t40\t0\t10\t20\t5\tWeak headline\n";
  const auto a50 = parse_benchmark_tsv(affective, Scheme::affective, "affective");
  REQUIRE(a50.size() == 1);
  CHECK(a50[0].label == Emotion::joy);
  const auto a30 = parse_benchmark_tsv(affective, Scheme::affective, "affective", 30);
  REQUIRE(a30.size() == 2);
  CHECK(a30[1].label == Emotion::anger);
  CHECK_THROWS_AS(parse_benchmark_tsv("10\t5\t0\t80\tx\n", Scheme::affective, "a"), RecordError);
  CHECK_THROWS_AS(parse_benchmark_tsv("10\t5\t0\t80\t20\t300\ttext\n", Scheme::affective, "a"), RecordError);

  const auto tales = parse_benchmark_tsv(
      "angry,disgusted\tThe wolf snarled.\nhappy,sad\tMixed.\nfearful,fearful\tDark woods.\nhappy\tJoy.\n",
      Scheme::fairy_tales, "fairy_tales");
  REQUIRE(tales.size() == 2);
  CHECK(tales[0].label == Emotion::anger);
  CHECK(tales[1].label == Emotion::joy);
  std::vector<RecordIssue> skipped;
  const auto tolerant = parse_benchmark_tsv("gleeful\tx\nsad\ty\n", Scheme::fairy_tales, "ft", 50, LoadMode::tolerant, &skipped);
  CHECK(tolerant.size() == 1);
  REQUIRE(skipped.size() == 1);
  CHECK(skipped[0].record == 1);

  CHECK(parse_benchmark_tsv("love\tcute\nlike\tmeh\n", Scheme::facebook, "fb").size() == 1);
}

TEST_CASE("synthetic corpora") {
  SUBCASE("noise-free four documents") {
    const auto docs = synth_corpus(4, 10, 0.0, 5);
    REQUIRE(docs.size() == 4);
    std::set<Emotion> labels;
    for (const auto& d : docs) {
      labels.insert(d.label);
      const auto vocab = synth_vocabulary(d.label, 10);
      const std::set<std::string> allowed(vocab.begin(), vocab.end());
      for (const auto& t : tokenize(d.text)) CHECK(allowed.contains(t));
    }
    CHECK(labels.size() == 4);
  }
  SUBCASE("deterministic") {
    const auto a = write_canonical_tsv(synth_corpus(500, 20, 0.1, 42));
    CHECK(a == write_canonical_tsv(synth_corpus(500, 20, 0.1, 42)));
    CHECK(a != write_canonical_tsv(synth_corpus(500, 20, 0.1, 43)));
  }
  SUBCASE("balanced classes") {
    for (std::size_t n : {1u, 2u, 7u, 2000u, 2001u}) {
      std::array<std::size_t, 4> counts{};
      for (const auto& d : synth_corpus(n, 5, 0.05, 1)) ++counts[ordinal(d.label)];
      const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      CHECK(*hi - *lo <= 1);
    }
  }
  SUBCASE("partitions are disjoint") {
    std::set<std::string> all;
    std::size_t total = 0;
    for (auto e : kEmotions) {
      for (const auto& w : synth_vocabulary(e, 60)) {
        all.insert(w);
        ++total;
      }
    }
    CHECK(all.size() == total);
  }
  SUBCASE("noise rate is respected on average") {
    SynthSpec spec;
    spec.n_docs = 2000;
    spec.noise_rate = 0.2;
    std::size_t foreign = 0, tokens = 0;
    std::array<std::set<std::string>, 4> vocab;
    for (auto e : kEmotions) {
      const auto v = synth_vocabulary(e, spec.vocab_per_class);
      vocab[ordinal(e)] = {v.begin(), v.end()};
    }
    for (const auto& d : synth_corpus(spec)) {
      for (const auto& t : tokenize(d.text)) {
        ++tokens;
        if (!vocab[ordinal(d.label)].contains(t)) ++foreign;
      }
    }
    CHECK(static_cast<double>(foreign) / static_cast<double>(tokens) == doctest::Approx(0.2).epsilon(0.1));
  }
}
