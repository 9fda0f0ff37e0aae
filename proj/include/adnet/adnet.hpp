#pragma once

#include <adnet/adam.hpp>
#include <adnet/error.hpp>
#include <adnet/evaluation.hpp>
#include <adnet/io.hpp>
#include <adnet/model.hpp>
#include <adnet/synth.hpp>
#include <adnet/tape.hpp>
#include <adnet/tensor.hpp>
#include <adnet/training.hpp>
#include <adnet/version.hpp>
#include <adnet/windowing.hpp>
