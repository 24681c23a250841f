#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

#include "ulb/orchestrate.hpp"
#include "ulb/report.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

ulb::AccuracyTriple triple(double f, double r, double t) {
  ulb::AccuracyTriple a;
  a.forget_acc = f;
  a.retain_acc = r;
  a.test_acc = t;
  return a;
}

std::string run_experiment(const std::string& config_json, bool verbose) {
  ulb::ExperimentConfig cfg =
      ulb::experiment_config_from_json(json::parse(config_json));
  ulb::Orchestrator orch(std::move(cfg));
  orch.set_verbose(verbose);
  orch.run();
  // Re-read the log so the caller sees exactly what was persisted.
  json out = json::array();
  const auto log_path = orch.run_dir() / "records.jsonl";
  if (std::filesystem::exists(log_path))
    for (const ulb::RunRecord& r : ulb::read_record_log(log_path))
      out.push_back(ulb::run_record_to_json(r));
  json wrapper{{"run_dir", orch.run_dir().string()},
               {"config_hash", orch.hash()},
               {"records", std::move(out)}};
  return wrapper.dump();
}

std::string validate_proxies(const std::string& config_json, bool verbose) {
  ulb::ExperimentConfig cfg =
      ulb::experiment_config_from_json(json::parse(config_json));
  cfg.protocol = ulb::Protocol::kProxyValidation;
  cfg.steps = 0;
  cfg.validate();
  ulb::Orchestrator orch(std::move(cfg));
  orch.set_verbose(verbose);
  json rows = json::array();
  for (const ulb::ProxyFidelity& f : orch.run_proxy_validation())
    rows.push_back(json{{"proxy", ulb::proxy_kind_name(f.kind)},
                        {"rho", f.rho},
                        {"n", f.n},
                        {"model", f.model_id},
                        {"dataset", f.dataset_id}});
  json wrapper{{"run_dir", orch.run_dir().string()}, {"rows", std::move(rows)}};
  return wrapper.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Machine unlearning benchmark core (memorization proxies, staged "
            "unlearning, ToW metrics)";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ulb::ConfigError>(m, "ConfigError");

  m.def(
      "tow",
      [](double uf, double ur, double ut, double rf, double rr, double rt) {
        return ulb::tow_value(triple(uf, ur, ut), triple(rf, rr, rt));
      },
      py::arg("u_forget"), py::arg("u_retain"), py::arg("u_test"),
      py::arg("r_forget"), py::arg("r_retain"), py::arg("r_test"),
      "Three-factor tug-of-war score from raw accuracies");

  m.def(
      "tow_mia",
      [](double m_u, double m_r, double ur, double ut, double rr, double rt) {
        return ulb::tow_mia_value(m_u, m_r, triple(0.0, ur, ut),
                                  triple(0.0, rr, rt));
      },
      py::arg("m_u"), py::arg("m_r"), py::arg("u_retain"), py::arg("u_test"),
      py::arg("r_retain"), py::arg("r_test"),
      "Membership-gap tug-of-war score from raw accuracies and MIA rates");

  m.def(
      "spearman_rho",
      [](const std::map<std::int64_t, double>& a,
         const std::map<std::int64_t, double>& b) {
        return ulb::spearman_rho(a, b);
      },
      py::arg("a"), py::arg("b"),
      "Rank correlation of two id-keyed score maps (mid-ranks for ties)");

  m.def(
      "load_config",
      [](const std::filesystem::path& path) {
        return ulb::experiment_config_to_json(
                   ulb::load_experiment_config(path))
            .dump();
      },
      py::arg("path"),
      "Parse, validate and canonicalize an experiment config; returns JSON");

  m.def(
      "config_hash",
      [](const std::string& config_json) {
        return ulb::config_hash(
            ulb::experiment_config_from_json(json::parse(config_json)));
      },
      py::arg("config_json"), "Content hash of a canonicalized config");

  m.def("run_experiment", &run_experiment, py::arg("config_json"),
        py::arg("verbose") = false,
        "Run an experiment; returns {run_dir, config_hash, records} as JSON");

  m.def("validate_proxies", &validate_proxies, py::arg("config_json"),
        py::arg("verbose") = false,
        "Correlate proxies against estimated memorization; returns JSON rows");

  m.def(
      "write_report",
      [](const std::filesystem::path& run_dir) {
        std::vector<std::string> out;
        for (const auto& p : ulb::write_report(run_dir))
          out.push_back(p.string());
        return out;
      },
      py::arg("run_dir"), "Aggregate a run directory into report files");

  m.def(
      "store_entries",
      [](const std::filesystem::path& store_dir) {
        ulb::CheckpointStore store(store_dir);
        std::vector<std::map<std::string, std::string>> out;
        for (const ulb::StoreEntry& e : store.list())
          out.push_back({{"id", e.id},
                         {"lineage", ulb::lineage_name(e.lineage)},
                         {"architecture", e.architecture},
                         {"param_count", std::to_string(e.param_count)},
                         {"parent", e.parent_id}});
        return out;
      },
      py::arg("store_dir"), "List checkpoints in a store");

  m.def(
      "store_verify",
      [](const std::filesystem::path& store_dir) {
        return ulb::CheckpointStore(store_dir).verify();
      },
      py::arg("store_dir"),
      "Integrity sweep of a checkpoint store; returns problem messages");
}
