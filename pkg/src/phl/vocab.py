"""IRI constants for the vocabularies the pod server reads and writes."""

from __future__ import annotations

from .rdf import ACL_NS, FOAF_NS, LDP_NS, OA_NS, RDF_TYPE, RDFS_NS, VCARD_NS, XSD_NS

# Artifact namespace for terms this system itself mints.
PHL_NS = "https://phl.example/ns#"

TYPE = RDF_TYPE

# LDP
LDP_BASIC_CONTAINER = LDP_NS + "BasicContainer"
LDP_CONTAINER = LDP_NS + "Container"
LDP_CONTAINS = LDP_NS + "contains"
LDP_INBOX = LDP_NS + "inbox"
# Deliberately w3c.org, not w3.org: the wire format peers exchange mints
# the inbox/chat types under that host, so we match it byte for byte.
INBOX_TYPE = "https://www.w3c.org/ns/ldp#inbox"
LONG_CHAT_TYPE = "https://www.w3c.org/ns/type#LongChat"

# WAC
ACL_AUTHORIZATION = ACL_NS + "Authorization"
ACL_ACCESS_TO = ACL_NS + "accessTo"
ACL_MODE = ACL_NS + "mode"
ACL_AGENT = ACL_NS + "agent"
ACL_AGENT_GROUP = ACL_NS + "agentGroup"
ACL_AGENT_CLASS = ACL_NS + "agentClass"
ACL_DEFAULT = ACL_NS + "default"
ACL_ORIGIN = ACL_NS + "origin"
ACL_TRUSTED_APP = ACL_NS + "trustedApp"
ACL_READ = ACL_NS + "Read"
ACL_WRITE = ACL_NS + "Write"
ACL_CONTROL = ACL_NS + "Control"
ACL_APPEND = ACL_NS + "Append"
FOAF_AGENT = FOAF_NS + "Agent"  # the "everyone" agent class
ACL_AUTHENTICATED_AGENT = ACL_NS + "AuthenticatedAgent"  # anyone with a WebID

# FOAF / profiles
FOAF_PERSON = FOAF_NS + "Person"
FOAF_PROFILE_DOC = FOAF_NS + "PersonalProfileDocument"
FOAF_NAME = FOAF_NS + "name"
FOAF_KNOWS = FOAF_NS + "knows"
FOAF_MAKER = FOAF_NS + "maker"
RDFS_SEE_ALSO = RDFS_NS + "seeAlso"

# vCard groups
VCARD_GROUP = VCARD_NS + "Group"
VCARD_HAS_UID = VCARD_NS + "hasUID"
VCARD_HAS_MEMBER = VCARD_NS + "hasMember"

# Web Annotation
OA_HAS_TARGET = OA_NS + "hasTarget"
OA_ANNOTATION = OA_NS + "Annotation"
OA_BODY_VALUE = OA_NS + "bodyValue"

# Datatypes
XSD_DECIMAL = XSD_NS + "decimal"
XSD_INTEGER = XSD_NS + "integer"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_DATETIME = XSD_NS + "dateTime"

# Artifact terms
PHL_NOTIFICATION = PHL_NS + "Notification"
PHL_SENDER = PHL_NS + "sender"
PHL_SUBSCRIBER = PHL_NS + "subscriber"
PHL_ZIP = PHL_NS + "zip"
PHL_PATIENT = PHL_NS + "patient"
PHL_RECORD_TYPE = PHL_NS + "recordType"
PHL_CODE = PHL_NS + "code"
PHL_VALUE = PHL_NS + "value"
PHL_DATE = PHL_NS + "date"
PHL_METRIC = PHL_NS + "metric"
PHL_TIMESTAMP = PHL_NS + "timestamp"
PHL_REGISTRY_RECORD = PHL_NS + "RegistryRecord"
PHL_ODL_READING = PHL_NS + "OdlReading"
PHL_SDOH_RECORD = PHL_NS + "SdohRecord"
PHL_WALKABILITY = PHL_NS + "walkabilityScore"
PHL_TRANSIT = PHL_NS + "transitAccess"
PHL_LANGUAGE = PHL_NS + "languageService"
PHL_FOCUS = PHL_NS + "focus"
PHL_FRAME = PHL_NS + "frame"
PHL_FREQUENCY = PHL_NS + "frequency"
PHL_ISSUED_AT = PHL_NS + "issuedAt"
PHL_CANDIDATE = PHL_NS + "candidate"
PHL_JUSTIFICATION = PHL_NS + "appliedRule"
PHL_TEST_RESULT = PHL_NS + "testResult"
PHL_SUGGESTION = PHL_NS + "ExternalSuggestion"
PATTERN_ENDPOINT_REL = PHL_NS + "patternEndpoint"


def pod_type(authority: str, local: str) -> str:
    """Pod-local type IRI, e.g. https://bob.uthsc.edu/ns/type#Message."""
    return f"https://{authority}/ns/type#{local}"
