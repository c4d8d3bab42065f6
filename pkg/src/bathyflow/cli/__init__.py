# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Command line plumbing: the Settings context manager base, config file formats, logging and info options.
"""
