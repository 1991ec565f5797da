#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "funcount/decomposition.hpp"
#include "funcount/ingest.hpp"

namespace funcount {

/// Design-ready predictors for the mortality models. Categorical covariates
/// are dummy coded against their first level (White, Male, Less than High
/// School, Never, No), so reference levels have no column. No intercept
/// column; the logistic model adds its own.
struct PredictorTable {
    std::vector<std::string> subject_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd x;                        // N x p
    std::vector<Eigen::Index> score_columns;  // indices into `columns`
    Eigen::VectorXd weights;                  // adjusted survey weights
    Eigen::VectorXi outcome;                  // 0 = alive, 1 = dead

    Eigen::Index n_rows() const { return x.rows(); }
    Eigen::Index n_columns() const { return x.cols(); }
    /// Row subset; weights are carried over unchanged.
    PredictorTable subset(const std::vector<Eigen::Index>& rows) const;
};

/// Covariate columns in table order, before any score columns.
std::vector<std::string> covariate_column_names();

/// Joins covariates (and, when given, the decomposition's scores by subject
/// id) into a table. Subjects without scores are dropped; survey weights are
/// adjusted to mean one over the retained subjects.
PredictorTable build_predictor_table(const std::vector<SubjectCovariates>& subjects,
                                     const Decomposition* decomp = nullptr);

}  // namespace funcount
