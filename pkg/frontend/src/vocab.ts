/** IRIs of every term the client reads or writes. */

export const RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
export const RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#";
export const XSD_NS = "http://www.w3.org/2001/XMLSchema#";
export const FOAF_NS = "http://xmlns.com/foaf/0.1/";
export const LDP_NS = "http://www.w3.org/ns/ldp#";
export const ACL_NS = "http://www.w3.org/ns/auth/acl#";
export const VCARD_NS = "http://www.w3.org/2006/vcard/ns#";
export const OA_NS = "http://www.w3.org/ns/oa#";
export const PHL_NS = "https://phl.example/ns#";

export const RDF_TYPE = RDF_NS + "type";
export const XSD_STRING = XSD_NS + "string";
export const XSD_DATETIME = XSD_NS + "dateTime";

export const LDP_BASIC_CONTAINER = LDP_NS + "BasicContainer";
export const LDP_CONTAINS = LDP_NS + "contains";
export const LDP_INBOX = LDP_NS + "inbox";

export const ACL_AUTHORIZATION = ACL_NS + "Authorization";
export const ACL_ACCESS_TO = ACL_NS + "accessTo";
export const ACL_AGENT = ACL_NS + "agent";
export const ACL_AGENT_GROUP = ACL_NS + "agentGroup";
export const ACL_AGENT_CLASS = ACL_NS + "agentClass";
export const ACL_MODE = ACL_NS + "mode";
export const ACL_ORIGIN = ACL_NS + "origin";
export const ACL_TRUSTED_APP = ACL_NS + "trustedApp";
export const ACL_AUTHENTICATED_AGENT = ACL_NS + "AuthenticatedAgent";

export const FOAF_AGENT = FOAF_NS + "Agent";
export const FOAF_NAME = FOAF_NS + "name";
export const FOAF_KNOWS = FOAF_NS + "knows";

export const OA_BODY_VALUE = OA_NS + "bodyValue";
export const OA_HAS_TARGET = OA_NS + "hasTarget";

export const PHL_FOCUS = PHL_NS + "focus";
export const PHL_FRAME = PHL_NS + "frame";
export const PHL_FREQUENCY = PHL_NS + "frequency";
export const PHL_LANGUAGE = PHL_NS + "languageService";
export const PHL_CANDIDATE = PHL_NS + "candidate";
export const PHL_ISSUED_AT = PHL_NS + "issuedAt";
export const PHL_APPLIED_RULE = PHL_NS + "appliedRule";
export const PHL_ZIP = PHL_NS + "zip";

export const ACCESS_MODES = ["Read", "Write", "Append", "Control"] as const;
export type AccessMode = (typeof ACCESS_MODES)[number];

export const FOCUS_VALUES = ["diet", "exercise", "medication-adherence"] as const;
export const FRAME_VALUES = ["educational", "motivational", "goal-based"] as const;
export const FREQUENCY_VALUES = ["daily", "weekly"] as const;

/** Well-known prefix labels, preloaded for parsing and compact output. */
export const DEFAULT_PREFIXES: Readonly<Record<string, string>> = {
  rdf: RDF_NS,
  rdfs: RDFS_NS,
  xsd: XSD_NS,
  foaf: FOAF_NS,
  ldp: LDP_NS,
  acl: ACL_NS,
  vcard: VCARD_NS,
  oa: OA_NS,
};
