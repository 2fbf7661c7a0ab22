#pragma once

#include <string>

#include "specdyn/features.hpp"

namespace testgen {

/// Phi(x) = (x) on the real line.
class ScalarIdentityBasis final : public specdyn::FeatureBasis {
public:
    explicit ScalarIdentityBasis(std::string id = "scalar-identity") : id_(std::move(id)) {}

    std::size_t size() const override { return 1; }
    std::size_t state_dim() const override { return 1; }
    specdyn::Vector evaluate(const specdyn::Vector& x) const override {
        check_state(x);
        return x;
    }
    const specdyn::Vector& norms() const override { return norms_; }
    const std::string& id() const override { return id_; }

private:
    specdyn::Vector norms_ = specdyn::Vector::Ones(1);
    std::string id_;
};

/// Phi(x) = (1) in any dimension.
class ConstantBasis final : public specdyn::FeatureBasis {
public:
    explicit ConstantBasis(std::size_t dim = 1) : dim_(dim) {}

    std::size_t size() const override { return 1; }
    std::size_t state_dim() const override { return dim_; }
    specdyn::Vector evaluate(const specdyn::Vector& x) const override {
        check_state(x);
        return specdyn::Vector::Ones(1);
    }
    const specdyn::Vector& norms() const override { return norms_; }
    const std::string& id() const override { return id_; }

private:
    std::size_t dim_;
    specdyn::Vector norms_ = specdyn::Vector::Ones(1);
    std::string id_ = "constant";
};

}  // namespace testgen
