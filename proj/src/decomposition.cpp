#include "funcount/decomposition.hpp"

#include <fmt/format.h>

#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "decomposition";

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json rows_json(const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
    return out;
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd rows_from(const nlohmann::json& j, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto row = vector_from(j[i]);
        if (row.size() != cols) throw InputError(kModule, "ragged matrix in JSON");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
}

}  // namespace

std::string_view method_name(Method method) {
    switch (method) {
        case Method::GFPCA: return "GFPCA";
        case Method::PFPCA: return "PFPCA";
        case Method::NARFD: return "NARFD";
    }
    return "?";
}

std::string_view method_slug(Method method) {
    switch (method) {
        case Method::GFPCA: return "gfpca";
        case Method::PFPCA: return "pfpca";
        case Method::NARFD: return "narfd";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::GFPCA, Method::PFPCA, Method::NARFD}) {
        if (name == method_name(m) || name == method_slug(m)) return m;
    }
    throw InputError(kModule, fmt::format("unknown method '{}'", name));
}

Eigen::MatrixXd reconstruct(Method method, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& components, const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd linear = scores * components;
    switch (method) {
        case Method::GFPCA:
            linear.rowwise() += mean.transpose();
            return (linear.array().exp() - 1.0).cwiseMax(0.0).matrix();
        case Method::PFPCA:
            linear.rowwise() += mean.transpose();
            return linear.array().max(-700.0).exp().matrix();
        case Method::NARFD:
            return linear.cwiseMax(0.0);
    }
    return linear;
}

nlohmann::json to_json(const Decomposition& d) {
    nlohmann::json j;
    j["method"] = method_name(d.method);
    j["subject_ids"] = d.subject_ids;
    j["grid"] = vector_json(d.grid);
    if (d.method != Method::NARFD) j["mean"] = vector_json(d.mean);
    j["components"] = rows_json(d.components);
    j["eigenvalues"] = vector_json(d.eigenvalues);
    j["scores"] = rows_json(d.scores);
    j["noise_var"] = d.noise_var;
    j["lambda"] = d.lambda;
    j["converged"] = d.converged;
    j["iterations"] = d.iterations;
    j["objective_trace"] = d.objective_trace;
    j["diagnostics"] = d.diagnostics;
    return j;
}

Decomposition decomposition_from_json(const nlohmann::json& j) {
    try {
        Decomposition d;
        d.method = parse_method(j.at("method").get<std::string>());
        d.subject_ids = j.at("subject_ids").get<std::vector<std::string>>();
        d.grid = vector_from(j.at("grid"));
        const Eigen::Index t = d.grid.size();
        d.mean = j.contains("mean") ? vector_from(j.at("mean")) : Eigen::VectorXd::Zero(t);
        d.components = rows_from(j.at("components"), t);
        const Eigen::Index k = d.components.rows();
        d.scores = rows_from(j.at("scores"), k);
        d.eigenvalues = vector_from(j.at("eigenvalues"));
        d.noise_var = j.value("noise_var", 0.0);
        d.lambda = j.value("lambda", 0.0);
        d.converged = j.value("converged", true);
        d.iterations = j.value("iterations", 0);
        d.objective_trace = j.value("objective_trace", std::vector<double>{});
        d.diagnostics = j.value("diagnostics", std::vector<std::string>{});
        if (d.mean.size() != t) throw InputError(kModule, "mean length does not match grid");
        if (static_cast<Eigen::Index>(d.subject_ids.size()) != d.scores.rows()) {
            throw InputError(kModule, "subject_ids and scores disagree");
        }
        d.fitted = reconstruct(d.method, d.mean, d.components, d.scores);
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(kModule, fmt::format("malformed decomposition JSON: {}", e.what()));
    }
}

}  // namespace funcount
