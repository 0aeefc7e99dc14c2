__title__ = "SFW"
__description__ = "Symmetric forcing workbench: filters of subgroups, symmetric iterations and hereditarily symmetric names"
__url__ = ""
__download_url__ = ""
__version__ = "1.0.0"
__author__ = "SFW developers"
__author_email__ = ""
__license__ = ""
