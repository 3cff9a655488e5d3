#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fairguide/community.hpp"
#include "fairguide/eval.hpp"
#include "fairguide/graph.hpp"
#include "fairguide/io.hpp"
#include "fairguide/manifest.hpp"
#include "fairguide/meta_gradient.hpp"
#include "fairguide/metrics.hpp"
#include "fairguide/sampler.hpp"

namespace py = pybind11;
using namespace fairguide;

PYBIND11_MODULE(_fairguide, m) {
  m.doc() = "Budget-constrained link additions that guide graph structures "
            "toward group fairness";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<Graph>(m, "Graph")
      .def_readonly("num_nodes", &Graph::num_nodes)
      .def_readonly("num_edges", &Graph::num_edges)
      .def_readonly("features", &Graph::features)
      .def_readonly("sensitive", &Graph::sensitive)
      .def_readonly("labels", &Graph::labels)
      .def("edges", &Graph::edges)
      .def("has_edge", &Graph::has_edge)
      .def("degree", &Graph::degree)
      .def("validate", &Graph::validate)
      .def("__repr__", [](const Graph& g) {
        return "Graph(num_nodes=" + std::to_string(g.num_nodes) +
               ", num_edges=" + std::to_string(g.num_edges) + ")";
      });

  m.def("make_graph", &make_graph, py::arg("num_nodes"), py::arg("pairs"),
        py::arg("features"), py::arg("sensitive"),
        py::arg("labels") = std::vector<int>{});
  m.def("candidate_edges", &candidate_edges);
  m.def("add_edges", [](const Graph& g, const std::vector<std::pair<int, int>>& pairs) {
    EdgeBatch batch;
    batch.pairs = pairs;
    return add_edges(g, batch);
  });

  m.def("load_graph", &load_graph, py::arg("edge_path"), py::arg("feature_path"),
        py::arg("sensitive_path"), py::arg("label_path") = std::nullopt);
  m.def("load_dataset", &load_dataset);
  m.def("save_dataset", &save_dataset);
  m.def("save_edges", &save_edges);

  m.def("delta_sp_binary", [](const std::vector<int>& p, const std::vector<int>& s) {
    return delta_sp_binary(p, s);
  });
  m.def("delta_sp_multiclass", [](const std::vector<int>& a, const std::vector<int>& s) {
    return delta_sp_multiclass(a, s);
  });
  m.def("delta_sp_soft", [](const Mat& soft, const std::vector<int>& s) {
    return delta_sp_soft(soft, s);
  });
  m.def("delta_eo", [](const std::vector<int>& p, const std::vector<int>& s,
                       const std::vector<int>& y) { return delta_eo(p, s, y); });
  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(x, y);
  });

  py::class_<CorrelationBound>(m, "CorrelationBound")
      .def_readonly("alpha", &CorrelationBound::alpha)
      .def_readonly("delta", &CorrelationBound::delta)
      .def_readonly("lo", &CorrelationBound::lo)
      .def_readonly("hi", &CorrelationBound::hi);
  m.def("correlation_bound", &correlation_bound, py::arg("alpha"), py::arg("delta"));

  py::class_<SbmSpec>(m, "SbmSpec")
      .def(py::init<>())
      .def_readwrite("n", &SbmSpec::n)
      .def_readwrite("num_blocks", &SbmSpec::num_blocks)
      .def_readwrite("p_in", &SbmSpec::p_in)
      .def_readwrite("p_out", &SbmSpec::p_out)
      .def_readwrite("group_block_alignment", &SbmSpec::group_block_alignment)
      .def_readwrite("feature_dim", &SbmSpec::feature_dim)
      .def_readwrite("feature_signal", &SbmSpec::feature_signal)
      .def_readwrite("label_noise", &SbmSpec::label_noise)
      .def_readwrite("seed", &SbmSpec::seed);
  m.def("generate_sbm", &generate_sbm);

  py::class_<AutoencoderConfig>(m, "AutoencoderConfig")
      .def(py::init<>())
      .def_readwrite("hidden", &AutoencoderConfig::hidden)
      .def_readwrite("latent", &AutoencoderConfig::latent)
      .def_readwrite("epochs", &AutoencoderConfig::epochs)
      .def_readwrite("lr", &AutoencoderConfig::lr);

  py::class_<GuideConfig>(m, "GuideConfig")
      .def(py::init<>())
      .def_readwrite("budget", &GuideConfig::budget)
      .def_readwrite("batch_k", &GuideConfig::batch_k)
      .def_readwrite("beta", &GuideConfig::beta)
      .def_readwrite("tau", &GuideConfig::tau)
      .def_readwrite("epsilon", &GuideConfig::epsilon)
      .def_readwrite("alpha", &GuideConfig::alpha)
      .def_readwrite("k_steps", &GuideConfig::k_steps)
      .def_readwrite("communities", &GuideConfig::communities)
      .def_readwrite("autoencoder", &GuideConfig::autoencoder)
      .def_readwrite("seed", &GuideConfig::seed)
      .def_readwrite("community_cache", &GuideConfig::community_cache);

  py::class_<EdgeBatch>(m, "EdgeBatch")
      .def_readonly("pairs", &EdgeBatch::pairs)
      .def_readonly("iteration_index", &EdgeBatch::iteration_index)
      .def_readonly("truncated", &EdgeBatch::truncated);

  py::class_<IterationStats>(m, "IterationStats")
      .def_readonly("iteration", &IterationStats::iteration)
      .def_readonly("dsp_before", &IterationStats::dsp_before)
      .def_readonly("dsp_after", &IterationStats::dsp_after)
      .def_readonly("batch_size", &IterationStats::batch_size)
      .def_readonly("cross_group_fraction", &IterationStats::cross_group_fraction);

  py::class_<GuideResult>(m, "GuideResult")
      .def_readonly("additions", &GuideResult::additions)
      .def_readonly("loss_trace", &GuideResult::loss_trace)
      .def_readonly("iterations", &GuideResult::iterations)
      .def_readonly("final_graph", &GuideResult::final_graph)
      .def_readonly("exhausted", &GuideResult::exhausted)
      .def_readonly("links_added", &GuideResult::links_added);

  m.def("guide", &guide, py::arg("graph"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def("baseline_random_add", &baseline_random_add, py::arg("graph"),
        py::arg("n_links"), py::arg("seed"));
  m.def("baseline_linkpred_add", &baseline_linkpred_add, py::arg("graph"),
        py::arg("n_links"), py::arg("seed"));

  m.def("louvain", &louvain, py::arg("graph"), py::arg("seed"));
  m.def("modularity", &modularity, py::arg("graph"), py::arg("communities"));

  py::class_<MetricSummary>(m, "MetricSummary")
      .def_readonly("mean", &MetricSummary::mean)
      .def_readonly("stddev", &MetricSummary::stddev)
      .def_readonly("defined", &MetricSummary::defined);

  py::class_<EvalColumn>(m, "EvalColumn")
      .def_readonly("name", &EvalColumn::name)
      .def_readonly("f1", &EvalColumn::f1)
      .def_readonly("auc", &EvalColumn::auc)
      .def_readonly("dsp", &EvalColumn::dsp)
      .def_readonly("deo", &EvalColumn::deo)
      .def_readonly("dsp_cd", &EvalColumn::dsp_cd);

  m.def(
      "evaluate",
      [](const std::vector<std::pair<std::string, Graph>>& graphs,
         const std::vector<std::uint64_t>& seeds, int gcn_epochs, int gcn_hidden,
         double gcn_lr, int jobs) {
        std::vector<std::pair<std::string, const Graph*>> view;
        view.reserve(graphs.size());
        for (const auto& [name, g] : graphs) view.emplace_back(name, &g);
        EvalOptions opt;
        opt.seeds = seeds;
        opt.gcn.epochs = gcn_epochs;
        opt.gcn.hidden = gcn_hidden;
        opt.gcn.lr = gcn_lr;
        opt.jobs = jobs;
        return evaluate(view, opt);
      },
      py::arg("graphs"), py::arg("seeds") = std::vector<std::uint64_t>{10, 20, 30, 40, 50},
      py::arg("gcn_epochs") = 1000, py::arg("gcn_hidden") = 128,
      py::arg("gcn_lr") = 1e-3, py::arg("jobs") = 1,
      py::call_guard<py::gil_scoped_release>());
}
