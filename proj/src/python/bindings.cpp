// Python bindings. Structured results cross the boundary as JSON text and are
// decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frameguard/corpus.hpp"
#include "frameguard/error.hpp"
#include "frameguard/framing.hpp"
#include "frameguard/pipeline.hpp"
#include "frameguard/reformulator.hpp"
#include "frameguard/risk.hpp"
#include "frameguard/scoring.hpp"
#include "frameguard/stats/agreement.hpp"
#include "frameguard/stats/inference.hpp"

namespace py = pybind11;
namespace fg = frameguard;

namespace {

fg::AlignmentCondition alignment_arg(const std::string& s) {
  auto a = fg::parse_alignment(s);
  if (!a) throw fg::ValidationError("unknown alignment '" + s + "'");
  return *a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "frameguard core";

  static py::exception<fg::Error> error(m, "Error");
  static py::exception<fg::ValidationError> validation(m, "ValidationError", error.ptr());
  static py::exception<fg::ParseError> parse(m, "ParseError", error.ptr());
  static py::exception<fg::IoError> io(m, "IoError", error.ptr());
  static py::exception<fg::RemoteError> remote(m, "RemoteError", error.ptr());
  static py::exception<fg::FitError> fit(m, "FitError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const fg::ValidationError& e) {
      PyErr_SetString(validation.ptr(), e.what());
    } catch (const fg::ParseError& e) {
      PyErr_SetString(parse.ptr(), e.what());
    } catch (const fg::IoError& e) {
      PyErr_SetString(io.ptr(), e.what());
    } catch (const fg::RemoteError& e) {
      PyErr_SetString(remote.ptr(), e.what());
    } catch (const fg::FitError& e) {
      PyErr_SetString(fit.ptr(), e.what());
    } catch (const fg::Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def(
      "assess_risk",
      [](double health, const std::string& alignment) {
        const auto r = fg::assess(health, alignment_arg(alignment));
        return py::make_tuple(std::string(fg::to_string(r.level)), std::string(fg::to_string(r.action)),
                              r.allow_post, r.matched_rule);
      },
      py::arg("health"), py::arg("alignment"));

  m.def("score_health", [](const std::string& text) { return fg::BaselineHealthScorer().score(text); },
        py::arg("text"));

  m.def("split_sentences", &fg::split_sentences, py::arg("text"));

  m.def(
      "analyze_article_json",
      [](const std::string& text) {
        return fg::to_json(fg::analyze_article(text, fg::BaselineFrameScorer())).dump();
      },
      py::arg("text"));

  m.def(
      "moderate_json",
      [](const std::string& article, const std::string& comment) {
        const fg::BaselineHealthScorer health;
        const fg::BaselineFrameScorer frames;
        const auto a = fg::analyze_article(article, frames);
        return fg::to_json(fg::moderate_comment(a, comment, health, frames, nullptr)).dump();
      },
      py::arg("article"), py::arg("comment"));

  m.def(
      "parse_guidance",
      [](const std::string& raw) {
        const auto g = fg::parse_guidance(raw);
        return py::make_tuple(std::string(fg::to_string(g.risk_level)), g.suggestions, g.allow_post);
      },
      py::arg("raw"));

  m.def(
      "analyze_store_json",
      [](const std::string& store, std::uint64_t seed) {
        const auto loaded = fg::load_store(store);
        fg::PipelineConfig cfg;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return fg::analyze_corpus(loaded.corpus, cfg).dump();
      },
      py::arg("store"), py::arg("seed") = 42);

  m.def(
      "ingest",
      [](const std::string& articles, const std::string& comments, const std::string& format,
         const std::string& out) {
        const auto f = fg::parse_format(format);
        if (!f) throw fg::ValidationError("format must be jsonl or csv");
        auto r = fg::load_corpus(articles, comments, *f);
        fg::save_store(r.corpus, out, &r.report);
        return py::make_tuple(r.corpus.articles().size(), r.corpus.comments().size(), r.report.diagnostics.size());
      },
      py::arg("articles"), py::arg("comments"), py::arg("format"), py::arg("out"));

  m.def(
      "rebalance_counts",
      [](const std::vector<bool>& labels, const std::vector<double>& confidence, std::uint64_t seed) {
        if (labels.size() != confidence.size()) throw fg::ValidationError("labels and confidence differ in length");
        fg::LabeledSplit s;
        for (std::size_t i = 0; i < labels.size(); ++i) s.records.push_back({std::to_string(i), labels[i], confidence[i]});
        const auto r = fg::rebalance(s, {0.8, 2.0, seed});
        return py::make_tuple(r.count(true), r.count(false));
      },
      py::arg("labels"), py::arg("confidence"), py::arg("seed") = 42);

  m.def(
      "cohen_kappa", [](const std::vector<int>& a, const std::vector<int>& b) { return fg::stats::cohen_kappa(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "spearman", [](const std::vector<double>& a, const std::vector<double>& b) { return fg::stats::spearman(a, b); },
      py::arg("a"), py::arg("b"));
  m.def("ptukey", &fg::stats::ptukey, py::arg("q"), py::arg("k"));
  m.def("qtukey", &fg::stats::qtukey, py::arg("p"), py::arg("k"));
}
