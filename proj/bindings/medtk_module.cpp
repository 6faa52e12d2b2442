#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "med/edittree.hpp"
#include "med/harness.hpp"
#include "med/model.hpp"
#include "med/poet.hpp"

namespace py = pybind11;

namespace {

struct PyEditTree {
  med::edit::EditTreeRef ref;
};

med::Sample make_sample(const std::string& source_tag,
                        const std::string& source_form,
                        const std::string& target_tag,
                        const std::optional<std::string>& target_form) {
  med::Sample s;
  s.source_tag = source_tag;
  s.source_form = source_form;
  s.target_tag = target_tag;
  s.target_form = target_form;
  return s;
}

std::vector<const med::model::Model*> as_ptrs(
    const std::vector<med::model::Model*>& models) {
  return {models.begin(), models.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "character-level reinflection toolkit";

  py::class_<PyEditTree>(m, "EditTree")
      .def("is_leaf", [](const PyEditTree& t) { return t.ref->is_leaf(); })
      .def("key",
           [](const PyEditTree& t) { return med::edit::canonical_key(*t.ref); })
      .def("apply",
           [](const PyEditTree& t, const std::string& source) {
             return med::edit::apply_edit_tree(*t.ref, source);
           })
      .def("__eq__",
           [](const PyEditTree& a, const PyEditTree& b) {
             return *a.ref == *b.ref;
           })
      .def("__repr__", [](const PyEditTree& t) {
        return "EditTree(" + med::edit::canonical_key(*t.ref) + ")";
      });

  m.def("build_edit_tree",
        [](const std::string& source, const std::string& target) {
          return PyEditTree{med::edit::build_edit_tree(source, target)};
        });
  m.def("parse_key", [](const std::string& key) {
    return PyEditTree{med::edit::parse_key(key)};
  });
  m.def("lcs", [](const std::string& a, const std::string& b) {
    const med::edit::LcsResult r = med::edit::lcs(a, b);
    return py::make_tuple(r.start_a, r.start_b, r.len);
  });
  m.def("levenshtein", [](const std::string& a, const std::string& b) {
    return med::edit::levenshtein(a, b);
  });

  py::class_<med::Corpus>(m, "Corpus")
      .def(py::init<>())
      .def_static("load", &med::load_tsv)
      .def("save",
           [](const med::Corpus& c, const std::string& path) {
             med::save_tsv(c, path);
           })
      .def("__len__", &med::Corpus::size)
      .def("add",
           [](med::Corpus& c, const std::string& source_tag,
              const std::string& source_form, const std::string& target_tag,
              const std::optional<std::string>& target_form) {
             c.samples.push_back(
                 make_sample(source_tag, source_form, target_tag, target_form));
             c.tag_pairs.insert({source_tag, target_tag});
           },
           py::arg("source_tag"), py::arg("source_form"),
           py::arg("target_tag"), py::arg("target_form") = std::nullopt)
      .def("sample",
           [](const med::Corpus& c, std::size_t i) {
             const med::Sample& s = c.samples.at(i);
             return py::make_tuple(s.source_tag, s.source_form, s.target_tag,
                                   s.target_form);
           })
      .def("tag_pairs", [](const med::Corpus& c) {
        return std::vector<med::TagPair>(c.tag_pairs.begin(),
                                         c.tag_pairs.end());
      });

  py::class_<med::poet::PoetStore>(m, "PoetStore")
      .def_static("build", &med::poet::build_store)
      .def_static("load", &med::poet::load_store)
      .def("save",
           [](const med::poet::PoetStore& s, const std::string& path) {
             med::poet::save_store(s, path);
           })
      .def("pair_count", &med::poet::PoetStore::pair_count)
      .def("total_observations", &med::poet::PoetStore::total_observations)
      .def("candidates",
           [](const med::poet::PoetStore& store, const std::string& source_form,
              const std::string& source_tag, const std::string& target_tag,
              const std::string& prediction) {
             std::vector<py::tuple> out;
             for (const auto& c :
                  med::poet::candidates(store, source_form, source_tag,
                                        target_tag, prediction)) {
               out.push_back(
                   py::make_tuple(c.form, c.tree_key, c.frequency));
             }
             return out;
           })
      .def("correct",
           [](const med::poet::PoetStore& store, const std::string& source_form,
              const std::string& source_tag, const std::string& target_tag,
              const std::string& prediction, std::uint64_t seed) {
             med::Rng rng(seed);
             return med::poet::correct(store, source_form, source_tag,
                                       target_tag, prediction, rng);
           },
           py::arg("source_form"), py::arg("source_tag"),
           py::arg("target_tag"), py::arg("prediction"), py::arg("seed") = 0);

  py::class_<med::model::Config>(m, "Config")
      .def(py::init<>())
      .def_readwrite("hidden_size", &med::model::Config::hidden_size)
      .def_readwrite("embedding_size", &med::model::Config::embedding_size)
      .def_readwrite("maxout_pieces", &med::model::Config::maxout_pieces)
      .def_readwrite("minibatch_size", &med::model::Config::minibatch_size)
      .def_readwrite("iterations", &med::model::Config::iterations)
      .def_readwrite("clip_norm", &med::model::Config::clip_norm)
      .def_readwrite("adadelta_rho", &med::model::Config::adadelta_rho)
      .def_readwrite("adadelta_eps", &med::model::Config::adadelta_eps)
      .def_readwrite("max_decode_length", &med::model::Config::max_decode_length)
      .def_readwrite("beam_width", &med::model::Config::beam_width)
      .def_readwrite("seed", &med::model::Config::seed)
      .def("validate", &med::model::Config::validate);

  py::class_<med::model::Model>(m, "Model")
      .def("predict",
           [](const med::model::Model& model, const std::string& source_tag,
              const std::string& source_form, const std::string& target_tag,
              std::size_t beam) {
             const med::Sample s =
                 make_sample(source_tag, source_form, target_tag, std::nullopt);
             return beam ? med::model::predict(model, s, beam)
                         : med::model::predict(model, s);
           },
           py::arg("source_tag"), py::arg("source_form"),
           py::arg("target_tag"), py::arg("beam") = 0)
      .def("save",
           [](const med::model::Model& model, const std::string& dir) {
             med::model::save_model(model, dir);
           })
      .def_static("load", &med::model::load_model)
      .def_property_readonly("config",
                             [](const med::model::Model& m) { return m.config; })
      .def("log",
           [](const med::model::Model& m) {
             std::vector<py::tuple> out;
             for (const auto& e : m.log)
               out.push_back(py::make_tuple(e.iteration, e.loss));
             return out;
           });

  m.def("train",
        [](const med::Corpus& corpus, const med::model::Config& config) {
          return med::model::train(corpus, config);
        });
  m.def("ensemble_predict",
        [](const std::vector<med::model::Model*>& models,
           const std::string& source_tag, const std::string& source_form,
           const std::string& target_tag, std::uint64_t seed,
           std::size_t beam) {
          med::Rng rng(seed);
          return med::model::ensemble_predict(
              as_ptrs(models),
              make_sample(source_tag, source_form, target_tag, std::nullopt),
              rng, beam);
        },
        py::arg("models"), py::arg("source_tag"), py::arg("source_form"),
        py::arg("target_tag"), py::arg("seed") = 0, py::arg("beam") = 0);

  m.def("exact_match", &med::harness::exact_match);
  m.def("reduce_all", &med::harness::reduce_all);
  m.def("reduce_tagpair",
        [](const med::Corpus& corpus, const std::string& source_tag,
           const std::string& target_tag, double fraction, std::uint64_t seed) {
          return med::harness::reduce_tagpair(
              corpus, {source_tag, target_tag}, fraction, seed);
        });
  m.def("make_celex_folds",
        [](const med::Corpus& corpus, std::uint64_t seed) {
          const med::harness::FoldSet fs =
              med::harness::make_celex_folds(corpus, seed);
          std::vector<py::tuple> folds;
          for (const auto& f : fs.folds)
            folds.push_back(py::make_tuple(f.train, f.dev, f.test));
          return py::make_tuple(folds, fs.scaled);
        });
  m.def("evaluate",
        [](const std::vector<med::model::Model*>& models,
           const med::Corpus& test, const med::poet::PoetStore* store,
           std::uint64_t seed, std::size_t beam) {
          med::Rng rng(seed);
          const med::harness::EvalReport r =
              med::harness::evaluate(as_ptrs(models), test, store, rng, beam);
          py::dict out;
          out["total"] = r.total;
          out["mode"] = r.ensemble ? "ensemble" : "single";
          out["member_accuracies"] = r.member_accuracies;
          out["mean_accuracy"] = r.mean_accuracy;
          out["std_accuracy"] = r.std_accuracy;
          out["accuracy"] = r.accuracy;
          out["poet_applied"] = r.poet_applied;
          if (r.poet_applied) out["corrected_accuracy"] = r.corrected_accuracy;
          out["predictions"] = r.predictions;
          if (r.poet_applied) out["corrected"] = r.corrected;
          return out;
        },
        py::arg("models"), py::arg("test"), py::arg("store") = nullptr,
        py::arg("seed") = 0, py::arg("beam") = 0);
}
