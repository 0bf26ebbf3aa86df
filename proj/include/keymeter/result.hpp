#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace keymeter {

/// Lightweight expected-or-error carrier used for fallible operations whose
/// failure is part of normal control flow (wire decoding, file parsing,
/// meter polling). Programmer errors still throw.
template <typename T, typename E = std::string>
class Result {
public:
    Result(T value) : value_(std::in_place_index<0>, std::move(value)) {}

    static Result failure(E error)
    {
        return Result(std::in_place_index<1>, std::move(error));
    }

    bool ok() const { return value_.index() == 0; }
    explicit operator bool() const { return ok(); }

    const T& value() const&
    {
        assert(ok());
        return std::get<0>(value_);
    }
    T& value() &
    {
        assert(ok());
        return std::get<0>(value_);
    }
    T&& value() &&
    {
        assert(ok());
        return std::get<0>(std::move(value_));
    }

    const E& error() const
    {
        assert(!ok());
        return std::get<1>(value_);
    }

private:
    template <std::size_t I, typename V>
    Result(std::in_place_index_t<I> tag, V&& v) : value_(tag, std::forward<V>(v))
    {
    }

    std::variant<T, E> value_;
};

/// Result for operations with no payload.
template <typename E>
class Result<void, E> {
public:
    Result() = default;

    static Result failure(E error)
    {
        Result r;
        r.error_ = std::move(error);
        r.failed_ = true;
        return r;
    }

    bool ok() const { return !failed_; }
    explicit operator bool() const { return ok(); }

    const E& error() const
    {
        assert(failed_);
        return error_;
    }

private:
    E error_{};
    bool failed_ = false;
};

using Status = Result<void, std::string>;

} // namespace keymeter
