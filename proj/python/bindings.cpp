#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kqlearn/errors.hpp"
#include "kqlearn/harness.hpp"
#include "kqlearn/io.hpp"
#include "kqlearn/kqlearn.hpp"

namespace py = pybind11;
using namespace kqlearn;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// An (n, d) array of points.
PointList to_points(const RowMatrix& a) {
    PointList pts;
    pts.reserve(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) pts.emplace_back(a.row(i).transpose());
    return pts;
}

RowMatrix from_points(const PointList& pts) {
    if (pts.empty()) return RowMatrix(0, 0);
    RowMatrix a(static_cast<Eigen::Index>(pts.size()), pts.front().size());
    for (std::size_t i = 0; i < pts.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return a;
}

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) {
    return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict record_dict(const ExperimentRecord& r) {
    py::dict d;
    d["seed"] = r.seed;
    d["J"] = r.J;
    d["L"] = r.L;
    d["N"] = r.N;
    d["measured_error"] = r.measured_error;
    d["theorem1_bound"] = r.theorem1_bound;
    d["info_gain"] = r.info_gain;
    d["wall_time_seconds"] = r.wall_time_seconds;
    d["samples_used"] = r.samples_used;
    d["beta"] = r.beta;
    d["mix"] = r.mix;
    d["clip_violations"] = r.clip_violations;
    d["oracle_violations"] = r.oracle_violations;
    d["error"] = r.error;
    return d;
}

ExperimentRecord record_from(const py::dict& d) {
    ExperimentRecord r;
    r.N = d["N"].cast<std::size_t>();
    r.measured_error = d["measured_error"].cast<double>();
    if (d.contains("error")) r.error = d["error"].cast<std::string>();
    return r;
}

}  // namespace

PYBIND11_MODULE(_kqlearn, m) {
    m.doc() = "Kernel ridge regression Q-learning with a generative model";
    m.attr("__version__") = library_version();

    py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<KernelSpec>(m, "Kernel")
        .def_static("squared_exponential", &KernelSpec::squared_exponential, py::arg("lengthscale") = 0.2)
        .def_static("matern", &KernelSpec::matern, py::arg("nu"), py::arg("lengthscale") = 0.2)
        .def_static("linear", &KernelSpec::linear, py::arg("offset") = 0.0)
        .def_static("finite_rank", [](std::vector<double> ev) { return KernelSpec::finite_rank(std::move(ev)); },
                    py::arg("eigenvalues"))
        .def_static("from_json", [](const py::object& o) { return kernel_from_json(from_py(o)); })
        .def("to_json", [](const KernelSpec& k) { return to_py(kernel_to_json(k)); })
        .def_property_readonly("kind", &KernelSpec::kind)
        .def("__call__", &KernelSpec::operator(), py::arg("z"), py::arg("z2"))
        .def("gram", [](const KernelSpec& k, const RowMatrix& pts) { return gram(k, to_points(pts)); })
        .def("cross_gram", [](const KernelSpec& k, const RowMatrix& a, const RowMatrix& b) {
            return cross_gram(k, to_points(a), to_points(b));
        })
        .def("__repr__", [](const KernelSpec& k) { return "Kernel(" + kernel_to_json(k).dump() + ")"; });

    py::class_<RegressionModel>(m, "RegressionModel")
        .def(py::init([](const KernelSpec& k, const RowMatrix& pts, double lambda) {
                 return RegressionModel(k, DesignSet{to_points(pts), lambda});
             }),
             py::arg("kernel"), py::arg("points"), py::arg("lam") = 1.0)
        .def("with_observations", &RegressionModel::with_observations, py::arg("y"))
        .def("add_point", &RegressionModel::add_point, py::arg("z"))
        .def("predict", &RegressionModel::predict, py::arg("z"))
        .def("posterior_std", &RegressionModel::posterior_std, py::arg("z"))
        .def("posterior_variance", &RegressionModel::posterior_variance, py::arg("z"))
        .def_property_readonly("size", &RegressionModel::size)
        .def_property_readonly("lam", &RegressionModel::lambda)
        .def_property_readonly("factor", &RegressionModel::factor);

    m.def("fit", [](const KernelSpec& k, const RowMatrix& pts, const Eigen::VectorXd& y, double lambda) {
        return fit(k, DesignSet{to_points(pts), lambda}, y);
    }, py::arg("kernel"), py::arg("points"), py::arg("y"), py::arg("lam") = 1.0);
    m.def("confidence_width", &confidence_width, py::arg("c_k"), py::arg("r"), py::arg("lam"),
          py::arg("n_candidates"), py::arg("delta"));

    py::class_<GreedyTrace>(m, "GreedyTrace")
        .def_readonly("selected", &GreedyTrace::selected)
        .def_readonly("sigma2_at_selection", &GreedyTrace::sigma2_at_selection);

    m.def("build_max_uncertainty_set", [](const KernelSpec& k, const RowMatrix& grid, std::size_t J, double lambda) {
        return build_max_uncertainty_set(k, CandidateGrid{to_points(grid), {}}, J, lambda);
    }, py::arg("kernel"), py::arg("grid"), py::arg("J"), py::arg("lam") = 1.0);
    m.def("info_gain", [](const KernelSpec& k, const RowMatrix& pts, double lambda) {
        return info_gain(k, to_points(pts), lambda);
    }, py::arg("kernel"), py::arg("points"), py::arg("lam") = 1.0);
    m.def("verify_uncertainty_sum", [](const GreedyTrace& tr, const KernelSpec& k, const RowMatrix& grid, double lambda) {
        const auto rep = verify_uncertainty_sum(tr, k, CandidateGrid{to_points(grid), {}}, lambda);
        return py::dict(py::arg("lhs") = rep.lhs, py::arg("rhs") = rep.rhs, py::arg("holds") = rep.holds);
    }, py::arg("trace"), py::arg("kernel"), py::arg("grid"), py::arg("lam") = 1.0);

    py::class_<FiniteMdp>(m, "FiniteMdp")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& transition,
                         const Eigen::MatrixXd& reward, double gamma, const RowMatrix& embedding) {
                 if (transition.ndim() != 3) throw InputError("transition must have shape (S, A, S)");
                 const auto S = static_cast<std::size_t>(transition.shape(0));
                 const auto A = static_cast<std::size_t>(transition.shape(1));
                 std::vector<double> flat(transition.data(), transition.data() + transition.size());
                 return FiniteMdp(S, A, std::move(flat), reward, gamma, to_points(embedding));
             }),
             py::arg("transition"), py::arg("reward"), py::arg("gamma"), py::arg("embedding"))
        .def_static("from_json", [](const std::string& text) { return mdp_from_json(Json::parse(text)); })
        .def("to_json", [](const FiniteMdp& mdp) { return mdp_to_json(mdp).dump(); })
        .def_property_readonly("n_states", &FiniteMdp::n_states)
        .def_property_readonly("n_actions", &FiniteMdp::n_actions)
        .def_property_readonly("gamma", &FiniteMdp::gamma)
        .def_property_readonly("reward", &FiniteMdp::reward)
        .def_property_readonly("transition", [](const FiniteMdp& mdp) {
            py::array_t<double> out({mdp.n_states(), mdp.n_actions(), mdp.n_states()});
            std::copy(mdp.transition().begin(), mdp.transition().end(), out.mutable_data());
            return out;
        })
        .def_property_readonly("embedding", [](const FiniteMdp& mdp) { return from_points(mdp.embedding()); })
        .def("with_reward", &FiniteMdp::with_reward, py::arg("reward"));

    m.def("build_rkhs_mdp", [](const KernelSpec& k, std::size_t n_states, std::size_t n_actions, std::size_t d,
                               double gamma, std::optional<double> mix, double mix_fraction, std::uint64_t seed) {
        RkhsMdpParams p{n_states, n_actions, d, gamma, 0.0, seed};
        p.mix = mix ? *mix : std::min(mix_fraction * feasible_mix_limit(k, p), 0.999);
        return build_rkhs_mdp(k, p);
    }, py::arg("kernel"), py::arg("n_states") = 20, py::arg("n_actions") = 4, py::arg("d") = 2,
          py::arg("gamma") = 0.8, py::arg("mix") = py::none(), py::arg("mix_fraction") = 0.9, py::arg("seed") = 0);

    m.def("value_iteration", [](const FiniteMdp& mdp, double tol) {
        const auto opt = exact_value_iteration(mdp, tol);
        return py::make_tuple(opt.v, opt.q);
    }, py::arg("mdp"), py::arg("tol") = 1e-8);
    m.def("policy_value", [](const FiniteMdp& mdp, std::vector<std::size_t> actions, double tol) {
        return policy_value(mdp, Policy{std::move(actions)}, tol);
    }, py::arg("mdp"), py::arg("policy"), py::arg("tol") = 1e-8);
    m.def("greedy_policy", [](const Eigen::MatrixXd& q) { return greedy_policy(q).action_of; }, py::arg("q"));

    py::class_<KqlearnConfig>(m, "Config")
        .def(py::init([](std::size_t J, std::size_t L, double lambda, double delta, double gamma, std::uint64_t seed) {
                 return KqlearnConfig{J, L, lambda, delta, gamma, seed, 1.0};
             }),
             py::arg("J") = 200, py::arg("L") = 40, py::arg("lam") = 1.0, py::arg("delta") = 0.1,
             py::arg("gamma") = 0.8, py::arg("seed") = 0)
        .def_readwrite("J", &KqlearnConfig::J)
        .def_readwrite("L", &KqlearnConfig::L)
        .def_readwrite("lam", &KqlearnConfig::lambda)
        .def_readwrite("delta", &KqlearnConfig::delta)
        .def_readwrite("gamma", &KqlearnConfig::gamma)
        .def_readwrite("seed", &KqlearnConfig::seed)
        .def_readwrite("volume_constant", &KqlearnConfig::volume_constant);

    py::class_<RunResult>(m, "RunResult")
        .def_property_readonly("policy", [](const RunResult& r) { return r.policy.action_of; })
        .def_property_readonly("q", [](const RunResult& r) { return r.proxy.table(); })
        .def_property_readonly("weights", [](const RunResult& r) { return r.proxy.weights(); })
        .def_property_readonly("selected", [](const RunResult& r) { return r.trace.selected; })
        .def_property_readonly("y_history", [](const RunResult& r) {
            std::vector<Eigen::VectorXd> ys;
            for (const auto& st : r.y_history) ys.push_back(st.y);
            return ys;
        })
        .def_readonly("samples_used", &RunResult::samples_used)
        .def_readonly("beta", &RunResult::beta)
        .def_readonly("info_gain", &RunResult::info_gain)
        .def_readonly("theorem1_bound", &RunResult::theorem1_bound);

    m.def("run", &run, py::arg("mdp"), py::arg("kernel"), py::arg("config"));
    m.def("theorem1_bound", &theorem1_bound, py::arg("config"), py::arg("beta"), py::arg("gamma_info"));
    m.def("suggest_jl", [](double eps, double gamma, double beta_p, double delta) {
        const EigendecayProfile p = beta_p > 0 ? EigendecayProfile{PolynomialDecay{1.0, beta_p}}
                                               : EigendecayProfile{ExponentialDecay{}};
        return suggest_jl(eps, gamma, p, delta);
    }, py::arg("epsilon"), py::arg("gamma"), py::arg("beta_p") = 0.0, py::arg("delta") = 0.1,
          "Polynomial eigendecay when beta_p > 0, exponential otherwise.");

    m.def("sweep", [](const py::object& config) {
        const auto cfg = experiment_config_from_json(from_py(config));
        std::vector<ExperimentRecord> recs;
        {
            py::gil_scoped_release release;
            recs = sweep(cfg);
        }
        py::list out;
        for (const auto& r : recs) out.append(record_dict(r));
        return out;
    }, py::arg("config"));
    m.def("fit_loglog_slope", [](const py::list& records) {
        std::vector<ExperimentRecord> recs;
        for (const auto& r : records) recs.push_back(record_from(r.cast<py::dict>()));
        return fit_loglog_slope(recs);
    }, py::arg("records"));
    m.def("validate", [](const std::string& suite) { return to_py(validate(suite).to_json()); },
          py::arg("suite") = "all");
}
