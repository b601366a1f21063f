#pragma once

#include "lipcert/config.hpp"
#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/experiments.hpp"
#include "lipcert/geometry.hpp"
#include "lipcert/io.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/losses.hpp"
#include "lipcert/net.hpp"
#include "lipcert/optim.hpp"
#include "lipcert/rng.hpp"
#include "lipcert/robustness.hpp"
#include "lipcert/train.hpp"
#include "lipcert/transport.hpp"
