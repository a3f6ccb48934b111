#include "aas/clustering.hpp"
#include "aas/errors.hpp"
#include "aas/evaluation.hpp"
#include "aas/io.hpp"
#include "aas/np3.hpp"
#include "aas/pipeline.hpp"

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;

namespace
{

std::string relation_name(aas::Relation r)
{
  return std::string(aas::to_string(r));
}

aas::RowMatrixD similarity_to_dense(const aas::SimilarityMatrix& sim)
{
  if (sim.is_dense()) return sim.dense();
  const auto n = sim.size();
  aas::RowMatrixD out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = sim(i, j);
  return out;
}

aas::RunConfig config_from(const py::dict& overrides)
{
  auto json_mod = py::module_::import("json");
  return aas::io::decode_config(json_mod.attr("dumps")(overrides).cast<std::string>());
}

} // namespace

PYBIND11_MODULE(_aas, m)
{
  m.doc() = "Ambiguity-aware pair sampling and constrained pseudo-label refinement";

  auto base = py::register_exception<aas::Error>(m, "AasError", PyExc_RuntimeError);
  py::register_exception<aas::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<aas::ContradictionError>(m, "ContradictionError", base.ptr());
  py::register_exception<aas::ZeroVectorError>(m, "ZeroVectorError", base.ptr());
  py::register_exception<aas::InfeasibleShape>(m, "InfeasibleShape", base.ptr());
  py::register_exception<aas::NotApplicable>(m, "NotApplicable", base.ptr());
  py::register_exception<aas::NoPositives>(m, "NoPositives", base.ptr());
  py::register_exception<aas::LevelOutOfRange>(m, "LevelOutOfRange", base.ptr());

  py::class_<aas::EmbeddingSet>(m, "EmbeddingSet")
      .def(py::init<std::vector<std::string>, aas::RowMatrixF, std::optional<std::vector<std::string>>,
                    std::optional<std::vector<std::string>>>(),
           py::arg("ids"), py::arg("vectors"), py::arg("image_uris") = py::none(),
           py::arg("identities") = py::none())
      .def_property_readonly("ids", &aas::EmbeddingSet::ids)
      .def_property_readonly("vectors", &aas::EmbeddingSet::vectors)
      .def_property_readonly("image_uris", &aas::EmbeddingSet::image_uris)
      .def_property_readonly("identities", &aas::EmbeddingSet::identities)
      .def("__len__", &aas::EmbeddingSet::size)
      .def_property_readonly("dim", &aas::EmbeddingSet::dim);

  py::class_<aas::Partition>(m, "Partition")
      .def(py::init([](std::vector<int> labels) { return aas::Partition(std::move(labels)); }), py::arg("labels"))
      .def_readonly("labels", &aas::Partition::labels)
      .def_readonly("outliers", &aas::Partition::outliers)
      .def_property_readonly("num_clusters", &aas::Partition::num_clusters)
      .def("__len__", &aas::Partition::size);

  py::class_<aas::ConstraintStore>(m, "ConstraintStore")
      .def(py::init<std::size_t>(), py::arg("n"))
      .def(
          "add",
          [](aas::ConstraintStore& s, std::size_t a, std::size_t b, const std::string& relation, int cycle) {
            if (relation != "ml" && relation != "cl") throw aas::ValidationError("relation must be 'ml' or 'cl'");
            s.add({aas::PairKey(a, b), relation == "ml" ? aas::Relation::MustLink : aas::Relation::CannotLink,
                   aas::ConstraintSource::Oracle, cycle});
          },
          py::arg("a"), py::arg("b"), py::arg("relation"), py::arg("cycle") = 0)
      .def(
          "relation",
          [](const aas::ConstraintStore& s, std::size_t a, std::size_t b) {
            return relation_name(s.relation_of(aas::PairKey(a, b)));
          },
          py::arg("a"), py::arg("b"))
      .def("__len__", [](const aas::ConstraintStore& s) { return s.constraints().size(); });

  m.def("load_embeddings", [](const std::filesystem::path& p) { return aas::io::load_embeddings(p); }, py::arg("path"));
  m.def("save_embeddings", &aas::io::save_embeddings, py::arg("path"), py::arg("embeddings"));

  m.def(
      "generate_synthetic",
      [](std::size_t identities, std::size_t per_identity, std::size_t dim, double within, double between,
         std::uint64_t seed) {
        return aas::generate_synthetic({identities, per_identity, dim, within, between, seed});
      },
      py::arg("num_identities") = 10, py::arg("samples_per_identity") = 10, py::arg("dim") = 16,
      py::arg("within_spread") = 0.1, py::arg("between_spread") = 1.0, py::arg("seed") = 0);

  m.def(
      "k_reciprocal_similarity",
      [](const aas::EmbeddingSet& set, std::size_t k) {
        return similarity_to_dense(aas::k_reciprocal_similarity(set, k));
      },
      py::arg("embeddings"), py::arg("k"));

  m.def(
      "dbscan",
      [](const aas::RowMatrixD& distances, double eps, int min_samples) {
        return aas::dbscan(aas::DenseDistance(distances), {eps, min_samples});
      },
      py::arg("distances"), py::arg("eps") = 0.6, py::arg("min_samples") = 4);

  m.def(
      "finch", [](const aas::EmbeddingSet& set) { return aas::finch(set).levels; }, py::arg("embeddings"));

  m.def(
      "refine",
      [](const aas::Partition& part, const aas::ConstraintStore& store, const aas::EmbeddingSet& set) {
        return aas::refine(part, store, aas::MetricDistance(set, aas::Metric::Cosine));
      },
      py::arg("partition"), py::arg("store"), py::arg("embeddings"));
  m.def("count_violations", &aas::count_violations, py::arg("partition"), py::arg("store"));

  m.def(
      "hungarian",
      [](const aas::RowMatrixD& cost) {
        const auto a = aas::hungarian(cost);
        return py::make_tuple(a.column_of_row, a.total_cost);
      },
      py::arg("cost"));
  m.def(
      "greedy_color",
      [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        const auto c = aas::greedy_color(n, edges);
        return py::make_tuple(c.color, c.num_colors);
      },
      py::arg("num_nodes"), py::arg("edges"));

  m.def("adjusted_rand_index",
        py::overload_cast<const std::vector<int>&, const std::vector<int>&>(&aas::adjusted_rand_index),
        py::arg("pred"), py::arg("truth"));

  m.def(
      "evaluate",
      [](const aas::EmbeddingSet& gallery, const aas::EmbeddingSet& query) {
        const auto report = aas::evaluate(aas::RetrievalProblem(gallery, query));
        return py::module_::import("json").attr("loads")(aas::to_json(report));
      },
      py::arg("gallery"), py::arg("query"));

  m.def(
      "run_loop",
      [](const aas::EmbeddingSet& set, const py::dict& config, std::optional<std::filesystem::path> run_dir) {
        const auto cfg = config_from(config);
        aas::SimulatedOracle oracle(set);
        auto result = aas::run_loop(set, cfg, oracle, aas::RefreshOptions{}, run_dir);
        py::dict out;
        out["metrics"] = py::module_::import("json").attr("loads")(aas::rundir::metrics_json(result.state));
        out["history"] = py::module_::import("json").attr("loads")(aas::rundir::history_json(result.state));
        out["labels"] = result.final_partition.labels;
        return out;
      },
      py::arg("embeddings"), py::arg("config") = py::dict(), py::arg("run_dir") = py::none(),
      "Runs the active-learning loop against ground-truth identities (static refresh).");
}
