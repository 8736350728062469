from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

# The registry URL comes from RunConfig.database_url (MEMEVO_DATABASE_URL or
# --database-url); without one, manifests are only written to disk
Base = declarative_base()


def make_engine(database_url: str):
    """Create an engine; SQLite needs check_same_thread=False"""
    connect_args = {"check_same_thread": False} if database_url.startswith("sqlite") else {}
    return create_engine(database_url, connect_args=connect_args, echo=False)


def make_session_factory(database_url: str):
    """Build a session factory bound to database_url, creating missing tables"""
    engine = make_engine(database_url)
    create_tables(engine)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)


def create_tables(engine):
    """Create all tables in the database"""
    # registers every model on Base.metadata
    import models  # noqa: F401

    Base.metadata.create_all(bind=engine)
