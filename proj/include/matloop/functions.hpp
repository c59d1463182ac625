#pragma once

// Registry of scalar functions used by pointwise application.

#include <functional>
#include <map>
#include <span>
#include <string>

#include "matloop/error.hpp"
#include "matloop/semiring.hpp"
#include "matloop/typecheck.hpp"

namespace matloop {

template <class S>
struct ScalarFunction {
    using value_type = typename S::value_type;
    std::size_t arity = 0;
    std::function<value_type(std::span<const value_type>)> fn;
};

template <class S>
concept HasDivision = requires(const S& s, const typename S::value_type& a) {
    { s.divide(a, a) } -> std::convertible_to<typename S::value_type>;
};

template <class S>
concept HasPositivity = requires(const S& s, const typename S::value_type& a) {
    { s.positive(a) } -> std::convertible_to<typename S::value_type>;
};

/// Built-ins: div and gtz where the semiring supports them, hprodK and hsumK
/// everywhere. User entries take precedence over built-ins.
template <class S>
class FuncRegistry {
public:
    using value_type = typename S::value_type;

    FuncRegistry() = default;
    explicit FuncRegistry(S sr) : sr_(std::move(sr)) {}

    void add(const std::string& name, std::size_t arity,
             std::function<value_type(std::span<const value_type>)> fn) {
        user_[name] = ScalarFunction<S>{arity, std::move(fn)};
    }

    bool available(const std::string& name) const {
        try {
            lookup(name);
            return true;
        } catch (const Error&) {
            return false;
        }
    }

    ScalarFunction<S> lookup(const std::string& name) const {
        if (auto it = user_.find(name); it != user_.end()) return it->second;
        const S sr = sr_;
        if (name == "div") {
            if constexpr (HasDivision<S>) {
                return {2, [sr](std::span<const value_type> a) { return sr.divide(a[0], a[1]); }};
            } else {
                throw unavailable(name);
            }
        }
        if (name == "gtz") {
            if constexpr (HasPositivity<S>) {
                return {1, [sr](std::span<const value_type> a) { return sr.positive(a[0]); }};
            } else {
                throw unavailable(name);
            }
        }
        if (auto k = builtin_arity(name)) {
            if (name.rfind("hprod", 0) == 0)
                return {*k, [sr](std::span<const value_type> a) {
                            value_type acc = a[0];
                            for (std::size_t i = 1; i < a.size(); ++i) acc = sr.times(acc, a[i]);
                            return acc;
                        }};
            return {*k, [sr](std::span<const value_type> a) {
                        value_type acc = a[0];
                        for (std::size_t i = 1; i < a.size(); ++i) acc = sr.plus(acc, a[i]);
                        return acc;
                    }};
        }
        throw Error(ErrorKind::UnknownFunction, "no function named '" + name + "'");
    }

private:
    static Error unavailable(const std::string& name) {
        return Error(ErrorKind::FunctionUnavailableForSemiring,
                     name + " is not available over the " + std::string(S::name) + " semiring");
    }

    S sr_{};
    std::map<std::string, ScalarFunction<S>> user_;
};

}  // namespace matloop
