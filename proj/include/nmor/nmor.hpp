#pragma once

#include "nmor/version.hpp"
#include "nmor/errors.hpp"
#include "nmor/model.hpp"
#include "nmor/susceptibility.hpp"
#include "nmor/single_probe.hpp"
#include "nmor/colliding_probe.hpp"
#include "nmor/oracle.hpp"
#include "nmor/sweep.hpp"
#include "nmor/signal.hpp"
#include "nmor/config.hpp"
#include "nmor/io.hpp"
