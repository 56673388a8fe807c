#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lvx/cli.hpp"
#include "lvx/config.hpp"
#include "lvx/errors.hpp"
#include "lvx/kernels.hpp"
#include "lvx/volterra.hpp"
#include "lvx/wellposedness.hpp"

namespace py = pybind11;

namespace {

py::dict report_dict(const lvx::wellposedness::ConditionReport& r) {
  py::list items;
  for (const auto& it : r.items) {
    py::dict q;
    for (const auto& x : it.quantities) q[py::str(x.name)] = x.value;
    py::dict d;
    d["id"] = it.id;
    d["group"] = it.group;
    d["verdict"] = lvx::wellposedness::to_string(it.verdict);
    d["counted"] = it.counted;
    d["quantities"] = q;
    d["note"] = it.note;
    items.append(d);
  }
  py::dict out;
  out["checker"] = r.checker;
  out["overall"] = lvx::wellposedness::to_string(r.overall());
  out["items"] = items;
  if (r.size_lhs) out["size_lhs"] = *r.size_lhs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_lvx, m) {
  m.doc() = "Bindings for the lvx core library";

  m.def("bdg_constant", &lvx::wellposedness::bdg_constant, py::arg("p"));
  m.def("stability_fixed_point", &lvx::volterra::stability_fixed_point, py::arg("F"), py::arg("theta"), py::arg("gamma"));
  m.def(
      "heat_lp_norm",
      [](double a, int d, double p, double horizon) { return lvx::kernels::lp_norm(lvx::kernels::Kernel::heat(a, d), p, horizon).value; },
      py::arg("a"), py::arg("d"), py::arg("p"), py::arg("horizon"));
  m.def(
      "exp_kernel_family",
      [](double lambda, std::optional<double> alpha) {
        const auto f = lvx::volterra::exp_kernel_family(lambda, alpha);
        py::dict d;
        d["describe"] = f.describe();
        d["bounded_unique"] = f.bounded_unique;
        d["constant"] = f.constant;
        d["free_exponent"] = f.free_exponent;
        return d;
      },
      py::arg("lam"), py::arg("alpha") = py::none());
  m.def(
      "check",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        const auto c = lvx::config::load(path, overrides);
        return report_dict(lvx::wellposedness::check(c.model, c.checker));
      },
      py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
  m.def("preset_dir", &lvx::config::preset_dir);
  m.def("resolve_preset", &lvx::config::resolve_preset, py::arg("name"));
  m.def(
      "run",
      [](const std::string& command, const std::string& config, const std::vector<std::string>& overrides,
         std::optional<std::string> out_dir, std::optional<std::uint64_t> seed) {
        lvx::cli::Invocation inv;
        inv.command = command;
        inv.config = config;
        inv.overrides = overrides;
        inv.out_dir = out_dir;
        inv.seed = seed;
        std::ostringstream out, err;
        const int code = lvx::cli::run(inv, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("command"), py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
      py::arg("out_dir") = py::none(), py::arg("seed") = py::none());
  py::register_exception<lvx::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<lvx::NumericalFailure>(m, "NumericalFailure", PyExc_RuntimeError);
}
