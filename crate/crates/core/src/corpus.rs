//! The bundled MiniLang targets.

use crate::minilang::{parse_named, ParseError, Program};

pub struct Target {
    pub name: &'static str,
    pub source: &'static str,
    pub summary: &'static str,
}

impl Target {
    pub fn parse(&self) -> Result<Program, ParseError> {
        parse_named(self.source, self.name)
    }
}

macro_rules! target {
    ($name:literal, $summary:literal) => {
        Target { name: $name, source: include_str!(concat!("../targets/", $name, ".mini")), summary: $summary }
    };
}

pub const TARGETS: &[Target] = &[
    target!("demo", "division by an input-derived value"),
    target!("magic", "four-byte magic value guarding a parser, checked in stages"),
    target!("cache", "memoization whose cache guard can be deleted without effect"),
    target!("boundary", "length-prefixed copy into a fixed buffer"),
    target!("byteswitch", "byte classification through a comparison chain"),
    target!("checksum", "running checksum with a verified invariant"),
    target!("tlv", "type-length-value record parser"),
    target!("gcd", "recursive gcd and checked lcm"),
    target!("stackvm", "byte-coded stack machine"),
    target!("sort", "insertion sort with a sortedness check"),
];

pub fn target(name: &str) -> Option<&'static Target> {
    TARGETS.iter().find(|t| t.name == name)
}
