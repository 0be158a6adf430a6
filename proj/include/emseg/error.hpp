#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emseg {

// base class for all library errors
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// operand shapes are incompatible; the message names both shapes
struct ShapeError : Error {
    using Error::Error;
};

// a value lies outside its documented range
struct RangeError : Error {
    using Error::Error;
};

// invalid configuration or contract violation (bad mode, odd embedding dim, ...)
struct ConfigError : Error {
    using Error::Error;
};

// malformed input data; byte_offset points at the offending byte
struct ParseError : Error {
    std::size_t byte_offset;
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
};

// weighted-mean center update hit a cluster with zero assignment mass
struct EmptyClusterError : Error {
    std::size_t cluster;
    explicit EmptyClusterError(std::size_t k)
        : Error("cluster " + std::to_string(k) + " has zero assignment mass"), cluster(k) {}
};

// a memory-bank class was read before anything was pushed to it
struct EmptyQueueError : Error {
    std::size_t class_id;
    explicit EmptyQueueError(std::size_t id)
        : Error("memory bank class " + std::to_string(id) + " has an empty queue"), class_id(id) {}
};

}  // namespace emseg
