#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "wm/error.hpp"
#include "wm/semvec/provider.hpp"
#include "wm/semvec/semvec.hpp"

using namespace wm;
using semvec::CorpusStats;

namespace {

CorpusStats toy() {
  return CorpusStats::from_documents({{"CWE-1", {"buffer", "overflow", "buffer", "copy"}},
                                      {"CWE-2", {"race", "lock", "thread"}},
                                      {"CWE-3", {"buffer", "read", "bounds"}}});
}

}  // namespace

TEST_SUITE("semvec") {
  TEST_CASE("term counts and lengths") {
    auto s = toy();
    CHECK(s.count("buffer", "CWE-1") == 2);
    CHECK(s.count("lock", "CWE-1") == 0);
    CHECK(s.doc_freq("buffer") == 2);
    CHECK(s.doc_freq("missing") == 0);
    CHECK(s.category_length("CWE-1") == 4);
    CHECK(s.category_count() == 3);
    CHECK(s.has_category("CWE-2"));
    CHECK_THROWS_AS(s.category_length("CWE-9"), UnknownCategory);
    CHECK_THROWS_AS(semvec::compute_tf("x", "CWE-9", s), UnknownCategory);
  }

  TEST_CASE("tf, idf and their product by hand") {
    auto s = toy();
    CHECK(semvec::compute_tf("buffer", "CWE-1", s) == 0.5);
    CHECK(semvec::compute_idf("buffer", s) == doctest::Approx(std::log10(1.0)));
    CHECK(semvec::compute_idf("race", s) == doctest::Approx(std::log10(1.5)));
    CHECK(semvec::compute_idf("race", s, semvec::LogBase::log2) == doctest::Approx(std::log2(1.5)));
    CHECK(semvec::compute_idf("unseen", s) == doctest::Approx(std::log10(3.0)));
    CHECK(semvec::compute_tfidf("copy", "CWE-1", s) == doctest::Approx(0.25 * std::log10(1.5)));
  }

  TEST_CASE("idf is one for df=3 among 40 categories") {
    std::vector<CorpusStats::Document> docs;
    for (int i = 0; i < 40; ++i) docs.push_back({"C" + std::to_string(i), {i < 3 ? "w" : "other"}});
    CHECK(semvec::compute_idf("w", CorpusStats::from_documents(docs)) == 1.0);
  }

  TEST_CASE("word present in every category gets a negative idf") {
    auto s = CorpusStats::from_documents({{"A", {"x"}}, {"B", {"x"}}});
    CHECK(semvec::compute_idf("x", s) < 0.0);
  }

  TEST_CASE("category_count override") {
    auto s = CorpusStats::from_documents({{"A", {"x"}}}, 40);
    CHECK(semvec::compute_idf("x", s) == doctest::Approx(std::log10(20.0)));
  }

  TEST_CASE("category and message weights") {
    auto s = toy();
    auto w = semvec::category_weights("CWE-1", s);
    CHECK(w.size() == 3);
    CHECK(w.at("copy") == doctest::Approx(semvec::compute_tfidf("copy", "CWE-1", s)));
    auto m = semvec::message_weights({"race", "race", "bounds", "zzz"}, s);
    CHECK(m.at("race") == doctest::Approx(0.5 * std::log10(1.5)));
    CHECK(m.at("zzz") == doctest::Approx(0.25 * std::log10(3.0)));
    CHECK(semvec::message_weights({}, s).empty());
  }

  TEST_CASE("sentence vector: weighted mean over distinct covered words") {
    semvec::WordVectorTable t{2, {{"a", {1.0, 0.0}}, {"b", {0.0, 2.0}}}};
    auto v = semvec::sentence_vector({"a", "a", "b", "zzz"}, {{"a", 1.0}, {"b", 3.0}, {"zzz", 5.0}}, t, "id");
    CHECK(v.covered);
    CHECK(v.source_id == "id");
    CHECK(v.values[0] == doctest::Approx(0.25));
    CHECK(v.values[1] == doctest::Approx(1.5));
  }

  TEST_CASE("sentence vector degenerate cases give the zero vector") {
    semvec::WordVectorTable t{2, {{"a", {1.0, 1.0}}, {"b", {2.0, 0.0}}}};
    auto none = semvec::sentence_vector({"q"}, {{"q", 1.0}}, t);
    CHECK_FALSE(none.covered);
    CHECK(none.values == std::vector<double>{0.0, 0.0});
    auto zero_sum = semvec::sentence_vector({"a", "b"}, {{"a", 1.0}, {"b", -1.0}}, t);
    CHECK_FALSE(zero_sum.covered);
    CHECK(zero_sum.values == std::vector<double>{0.0, 0.0});
    semvec::WordVectorTable bad{3, {{"a", {1.0}}}};
    CHECK_THROWS_AS(semvec::sentence_vector({"a"}, {{"a", 1.0}}, bad), DimensionMismatch);
  }

  TEST_CASE("cosine") {
    CHECK(semvec::cosine({1, 0}, {0, 1}) == 0.0);
    CHECK(semvec::cosine({1, 1}, {2, 2}) == doctest::Approx(1.0));
    CHECK(semvec::cosine({1, 0}, {-3, 0}) == doctest::Approx(-1.0));
    CHECK(semvec::cosine({0, 0}, {1, 2}) == 0.0);
    CHECK_THROWS_AS(semvec::cosine({1}, {1, 2}), DimensionMismatch);
  }

  TEST_CASE("cosine properties on random vectors") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> pos(1e-3, 1e3);
    for (int i = 0; i < 500; ++i) {
      std::vector<double> u(7), v(7);
      for (auto& x : u) x = n(rng);
      for (auto& x : v) x = n(rng);
      const double c = semvec::cosine(u, v);
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
      CHECK(semvec::cosine(v, u) == doctest::Approx(c));
      auto scaled = u;
      const double k = pos(rng);
      for (auto& x : scaled) x *= k;
      CHECK(semvec::cosine(scaled, v) == doctest::Approx(c).epsilon(1e-12));
    }
  }

  TEST_CASE("tf-idf provider embeds categories and messages") {
    std::vector<cwe::CweCategory> cats = {{"CWE-1", "A", "buffer overflow copy", {"buffer", "overflow", "copy"}},
                                          {"CWE-2", "B", "race lock", {"race", "lock"}},
                                          {"CWE-3", "C", "input validation", {"input", "validation"}}};
    cwe::Catalog catalog(cats, "t");
    semvec::WordVectorTable table{2, {{"buffer", {1, 0}}, {"overflow", {1, 0.1}}, {"race", {0, 1}},
                                      {"lock", {0.1, 1}}, {"copy", {1, 0}}}};
    semvec::TfidfProvider p("tfidf", catalog, {"the"}, table);
    CHECK(p.dimension() == 2);
    auto c1 = p.embed_category(catalog.at("CWE-1"));
    auto c2 = p.embed_category(catalog.at("CWE-2"));
    auto m = p.embed_message("h", "Fix the buffer overflow");
    CHECK(m.covered);
    CHECK(semvec::cosine(m, c1) > semvec::cosine(m, c2));
    CHECK_FALSE(p.embed_category(catalog.at("CWE-3")).covered);
  }

  TEST_CASE("exchange provider lookups") {
    semvec::ExchangeFile f{2, {}, {{"CWE-1", {1, 0}}, {"abc", {0, 1}}}};
    semvec::ExchangeProvider p("m2", f);
    CHECK(p.contains("abc"));
    CHECK(p.embed_message("abc", "ignored").values == std::vector<double>{0, 1});
    CHECK(p.embed_category({"CWE-1", "", "", {}}).covered);
    CHECK_THROWS_AS(p.embed_message("nope", ""), UnknownTextId);
  }
}
